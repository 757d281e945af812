//! Independent oracles shared by the integration tests.
#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use mmp_core::field::VectorField;
use mmp_core::symbol::Mat9;
use mmp_core::{Grid, PhysParams, StateField};
use num_complex::Complex64;

pub type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

pub fn params() -> PhysParams {
    PhysParams::new(1.0, 1.0, 0.5, 1.0).unwrap()
}

/// The symbol written out entry by entry from `(u, w, b)` dynamics with the
/// coupling `χ ∇×`: in Fourier space `∇× v ↦ iξ × v`.
pub fn symbol_from_formula(xi: [f64; 3], p: &PhysParams) -> Mat9 {
    let k2 = xi.iter().map(|x| x * x).sum::<f64>();
    let mut m = Mat9::zeros();
    for a in 0..3 {
        let mut e = [0.0; 3];
        e[a] = 1.0;
        // column a of v ↦ i χ (−ξ × v)
        let cr = [
            xi[1] * e[2] - xi[2] * e[1],
            xi[2] * e[0] - xi[0] * e[2],
            xi[0] * e[1] - xi[1] * e[0],
        ];
        for b in 0..3 {
            let coupling = -I * p.chi * cr[b];
            m[(b, 3 + a)] = coupling;
            m[(3 + b, a)] = coupling;
            m[(3 + b, 3 + a)] = C::new(-xi[a] * xi[b], 0.0);
        }
        m[(a, a)] += -(p.mu + p.chi) * k2;
        m[(3 + a, 3 + a)] += -(p.gamma * k2 + 2.0 * p.chi);
        m[(6 + a, 6 + a)] += -p.nu * k2;
    }
    m
}

/// `e^{A}` by scaling and squaring with a 30-term Taylor series.
pub fn expm(a: &Mat9) -> Mat9 {
    let norm = a.iter().map(|x| x.norm()).sum::<f64>();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.5 {
        s += 1;
    }
    let scaled = a.map(|x| x / 2f64.powi(s));
    let mut term = Mat9::identity();
    let mut sum = Mat9::identity();
    for k in 1..=30 {
        term = term * scaled / C::new(k as f64, 0.0);
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

/// Phases `e^{2πi m/n}` for `m = 0..n`.
fn phases(n: usize) -> Vec<C> {
    (0..n).map(|m| C::from_polar(1.0, 2.0 * PI * m as f64 / n as f64)).collect()
}

fn phase_index(grid: &Grid, k: [i64; 3], x: [usize; 3]) -> usize {
    let n = grid.n() as i64;
    let s = k[0] * x[0] as i64 + k[1] * x[1] as i64 + k[2] * x[2] as i64;
    s.rem_euclid(n) as usize
}

/// `f(x) = Σ_k ĉ_k e^{ik·x}` by direct summation.
pub fn direct_inverse(grid: &Grid, c: &[C]) -> Vec<C> {
    let ph = phases(grid.n());
    (0..grid.len())
        .map(|x| {
            let xi = grid.axis_indices(x);
            (0..grid.len())
                .filter(|&k| c[k] != ZERO)
                .map(|k| c[k] * ph[phase_index(grid, grid.mode(k), xi)])
                .sum()
        })
        .collect()
}

/// `ĉ_k = n⁻³ Σ_x f(x) e^{−ik·x}` by direct summation.
pub fn direct_forward(grid: &Grid, f: &[C]) -> Vec<C> {
    let ph = phases(grid.n());
    let n = grid.n();
    (0..grid.len())
        .map(|k| {
            let km = grid.mode(k);
            let s: C = (0..grid.len())
                .map(|x| f[x] * ph[phase_index(grid, km, grid.axis_indices(x))].conj())
                .sum();
            s / (n * n * n) as f64
        })
        .collect()
}

fn two_thirds(grid: &Grid, idx: usize) -> bool {
    let cut = (grid.n() as i64 - 1) / 3;
    !grid.is_nyquist(idx) && grid.mode(idx).iter().all(|k| k.abs() <= cut)
}

fn mask(grid: &Grid, c: &[C]) -> Vec<C> {
    (0..grid.len()).map(|i| if two_thirds(grid, i) { c[i] } else { ZERO }).collect()
}

/// `v − ξ(ξ·v)/|ξ|²`, zero mean.
pub fn project(grid: &Grid, v: [Vec<C>; 3]) -> [Vec<C>; 3] {
    let mut out = v.clone();
    for idx in 0..grid.len() {
        let xi = grid.wavevector(idx);
        let k2: f64 = xi.iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            for c in out.iter_mut() {
                c[idx] = ZERO;
            }
            continue;
        }
        let dot: C = (0..3).map(|d| v[d][idx] * xi[d]).sum();
        for d in 0..3 {
            out[d][idx] = v[d][idx] - dot * xi[d] / k2;
        }
    }
    out
}

struct Physical {
    v: [Vec<C>; 3],
    /// `grad[j][i] = ∂_j v_i`
    grad: [[Vec<C>; 3]; 3],
}

fn physical(grid: &Grid, v: &VectorField) -> Physical {
    let m: Vec<Vec<C>> = v.comps.iter().map(|c| mask(grid, c)).collect();
    let vals = [0, 1, 2].map(|i| direct_inverse(grid, &m[i]));
    let grad = [0, 1, 2].map(|j| {
        [0, 1, 2].map(|i| {
            let d: Vec<C> = (0..grid.len()).map(|k| I * grid.wavevector(k)[j] * m[i][k]).collect();
            direct_inverse(grid, &d)
        })
    });
    Physical { v: vals, grad }
}

/// `(f·∇)g` pointwise.
fn advect(f: &Physical, g: &Physical, npts: usize) -> [Vec<C>; 3] {
    [0, 1, 2].map(|i| {
        (0..npts)
            .map(|x| (0..3).map(|j| f.v[j][x] * g.grad[j][i][x]).sum())
            .collect()
    })
}

/// The two-thirds-dealiased nonlinearity in advective form, by direct
/// transforms: `P[−(u·∇)u + (b·∇)b]`, `−(u·∇)w`, `P[(b·∇)u − (u·∇)b]`.
pub fn nonlinear_oracle(z: &StateField) -> [[Vec<C>; 3]; 3] {
    let grid = &z.grid;
    let npts = grid.len();
    let (u, w, b) = (physical(grid, &z.u), physical(grid, &z.w), physical(grid, &z.b));
    let fwd = |f: [Vec<C>; 3]| f.map(|c| mask(grid, &direct_forward(grid, &c)));
    let sub = |a: [Vec<C>; 3], b: [Vec<C>; 3]| {
        [0, 1, 2].map(|i| a[i].iter().zip(&b[i]).map(|(x, y)| x - y).collect::<Vec<C>>())
    };
    let uu = advect(&u, &u, npts);
    let bb = advect(&b, &b, npts);
    let uw = advect(&u, &w, npts);
    let bu = advect(&b, &u, npts);
    let ub = advect(&u, &b, npts);
    let nu = project(grid, fwd(sub(bb, uu)));
    let nw = fwd(uw).map(|c| c.into_iter().map(|x| -x).collect());
    let nb = project(grid, fwd(sub(bu, ub)));
    [nu, nw, nb]
}

fn phi1(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

fn phi2(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // Σ x^k / (k+2)!
        let (mut term, mut sum) = (0.5, 0.0);
        for k in 0..30 {
            sum += term;
            term *= x / (k + 3) as f64;
        }
        sum
    } else {
        (x.exp_m1() - x) / (x * x)
    }
}

/// One exponential RK2 step of the pure Navier–Stokes equations
/// `u_t + P(u·∇)u = μΔu`, with an independent advective nonlinearity.
pub fn navier_stokes_step(u: &VectorField, grid: &Grid, mu: f64, h: f64) -> [Vec<C>; 3] {
    let rhs = |v: &[Vec<C>; 3]| -> [Vec<C>; 3] {
        let field = VectorField { comps: v.clone() };
        let p = physical(grid, &field);
        let a = advect(&p, &p, grid.len());
        let f = a.map(|c| mask(grid, &direct_forward(grid, &c)).into_iter().map(|x| -x).collect());
        project(grid, f)
    };
    let lam: Vec<f64> = (0..grid.len())
        .map(|k| -mu * grid.wavevector(k).iter().map(|x| x * x).sum::<f64>())
        .collect();
    let z = u.comps.clone();
    let n0 = rhs(&z);
    let a: [Vec<C>; 3] = [0, 1, 2].map(|i| {
        (0..grid.len())
            .map(|k| z[i][k] * (h * lam[k]).exp() + n0[i][k] * h * phi1(h * lam[k]))
            .collect()
    });
    let n1 = rhs(&a);
    [0, 1, 2].map(|i| {
        (0..grid.len())
            .map(|k| a[i][k] + (n1[i][k] - n0[i][k]) * h * phi2(h * lam[k]))
            .collect()
    })
}

/// Composite Simpson rule with `2m` intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let n = 2 * m;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Largest coefficient difference relative to the largest coefficient.
pub fn rel_diff(a: &[[Vec<C>; 3]; 3], b: &StateField) -> f64 {
    let blocks = b.blocks();
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (x, y) in a.iter().zip(blocks) {
        for d in 0..3 {
            for (p, q) in x[d].iter().zip(&y.comps[d]) {
                diff = diff.max((p - q).norm());
                scale = scale.max(q.norm());
            }
        }
    }
    diff / scale.max(f64::MIN_POSITIVE)
}
