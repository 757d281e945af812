//! Exact linear evolution: modewise semigroup on the box and a continuum
//! radial quadrature of Fourier space.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{split_radius, NormSeries, SplitIntegral};
use crate::decay_character::SpectralProfile;
use crate::error::{Error, Result};
use crate::field::{PhysParams, StateField};
use crate::grid::Grid;
use crate::quadrature::{lebedev26, LogRadialRule};
use crate::symbol::{assemble_symbol, EigenBundle, Vec9};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigendecompositions of `M(ξ)` for every grid mode.
///
/// Only one member of each conjugate pair is decomposed; the partner's
/// result is filled in by conjugation so real fields stay exactly real.
/// Nyquist modes are dropped.
#[derive(Debug, Clone)]
pub struct GridSymbols {
    grid: Grid,
    /// Index of `−k` for every mode; Nyquist modes map to themselves.
    mirror: Vec<usize>,
    params: PhysParams,
    bundles: Vec<Option<EigenBundle>>,
}

impl GridSymbols {
    pub fn new(grid: Grid, params: &PhysParams) -> Result<Self> {
        params.validate()?;
        let bundles = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                if grid.is_nyquist(idx) || grid.neg_index(idx) < idx {
                    None
                } else {
                    Some(assemble_symbol(grid.wavevector(idx), params).eigen())
                }
            })
            .collect();
        let mirror = (0..grid.len())
            .map(|idx| if grid.is_nyquist(idx) { idx } else { grid.neg_index(idx) })
            .collect();
        Ok(Self {
            grid,
            mirror,
            params: *params,
            bundles,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn bundle(&self, idx: usize) -> Option<&EigenBundle> {
        self.bundles[idx].as_ref()
    }

    /// `max |λ(M(ξ))|` over the grid; `dt` times this is the stiffness the
    /// exponential integrator absorbs.
    pub fn spectral_radius(&self) -> f64 {
        self.bundles
            .iter()
            .flatten()
            .flat_map(|b| b.eigenvalues.iter().map(|l| l.abs()))
            .fold(0.0, f64::max)
    }

    /// `f(M(ξ)) ẑ(ξ)` for every mode.
    pub fn apply<F>(&self, z: &StateField, f: F) -> Result<StateField>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        self.combine(&[(z, &f)])
    }

    /// `e^{tM(ξ)} ẑ(ξ)` for every mode.
    pub fn evolve(&self, z: &StateField, t: f64) -> Result<StateField> {
        if !(t >= 0.0) {
            return Err(Error::Contract(format!("evolution time must be nonnegative, got {t}")));
        }
        if t == 0.0 {
            return Ok(z.clone());
        }
        self.apply(z, |l| (t * l).exp())
    }

    /// `Σ_m f_m(M(ξ)) ẑ_m(ξ)` for every mode.
    pub fn combine(&self, terms: &[(&StateField, &(dyn Fn(f64) -> f64 + Sync))]) -> Result<StateField> {
        let fields: Vec<&StateField> = terms.iter().map(|(z, _)| *z).collect();
        self.combine_with(&fields, |m, _, b| b.eigenvalues.map(|l| terms[m].1(l)))
    }

    /// Eigenvalue weights `f(λ_j(ξ))` for every mode, evaluated once.
    pub fn tabulate<F>(&self, f: F) -> ModeWeights
    where
        F: Fn(f64) -> f64 + Sync,
    {
        ModeWeights(
            self.bundles
                .par_iter()
                .map(|b| b.as_ref().map_or([0.0; 9], |b| b.eigenvalues.map(&f)))
                .collect(),
        )
    }

    /// [`GridSymbols::combine`] with pre-tabulated weights.
    pub fn combine_tabulated(&self, terms: &[(&StateField, &ModeWeights)]) -> Result<StateField> {
        let fields: Vec<&StateField> = terms.iter().map(|(z, _)| *z).collect();
        for (_, w) in terms {
            if w.0.len() != self.grid.len() {
                return Err(Error::Contract("weight table does not match the grid".into()));
            }
        }
        self.combine_with(&fields, |m, idx, _| terms[m].1 .0[idx])
    }

    /// One eigenbasis round trip per mode, then conjugate mirroring.
    fn combine_with<W>(&self, fields: &[&StateField], weight: W) -> Result<StateField>
    where
        W: Fn(usize, usize, &EigenBundle) -> [f64; 9] + Sync,
    {
        if fields.is_empty() {
            return Err(Error::Contract("no fields to combine".into()));
        }
        for z in fields {
            if z.grid != self.grid {
                return Err(Error::Contract(format!(
                    "field grid {:?} does not match symbol grid {:?}",
                    z.grid, self.grid
                )));
            }
            z.check()?;
        }
        let grid = self.grid;
        let mut vals: Vec<[Complex64; 9]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| match &self.bundles[idx] {
                Some(b) => {
                    // column-major storage: U[(i, j)] = u[j * 9 + i]
                    let u = b.unitary.as_slice();
                    let mut y = [ZERO; 9];
                    for (m, z) in fields.iter().enumerate() {
                        let v = z.mode_vector(idx);
                        let wts = weight(m, idx, b);
                        for j in 0..9 {
                            let col = &u[j * 9..j * 9 + 9];
                            let (mut re, mut im) = (0.0, 0.0);
                            for i in 0..9 {
                                // conj(U_ij) v_i
                                re += col[i].re * v[i].re + col[i].im * v[i].im;
                                im += col[i].re * v[i].im - col[i].im * v[i].re;
                            }
                            y[j] += Complex64::new(re, im) * wts[j];
                        }
                    }
                    let mut out = [ZERO; 9];
                    for j in 0..9 {
                        let col = &u[j * 9..j * 9 + 9];
                        for i in 0..9 {
                            out[i] += col[i] * y[j];
                        }
                    }
                    out
                }
                None => [ZERO; 9],
            })
            .collect();
        for idx in 0..grid.len() {
            let neg = self.mirror[idx];
            if neg < idx {
                vals[idx] = vals[neg].map(|c| c.conj());
            }
        }
        let mut out = StateField::from_modes(grid, |idx| vals[idx]);
        out.solenoidal_u = fields.iter().all(|z| z.solenoidal_u);
        out.solenoidal_b = fields.iter().all(|z| z.solenoidal_b);
        Ok(out)
    }
}

/// Per-mode eigenvalue weights produced by [`GridSymbols::tabulate`].
#[derive(Debug, Clone)]
pub struct ModeWeights(Vec<[f64; 9]>);

/// `z̄(t) = e^{tM} z₀` on the grid.
pub fn evolve_linear_grid(z0: &StateField, t: f64, params: &PhysParams) -> Result<StateField> {
    GridSymbols::new(z0.grid, params)?.evolve(z0, t)
}

/// Fixed axis used to build polarization frames; chosen off every lattice
/// direction so that `ξ̂ × a` never vanishes on a grid.
fn polarization_axis() -> [f64; 3] {
    let a = [1.0, 2f64.sqrt(), PI];
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Right-handed orthonormal frame `(ξ̂, p₁, p₂)` with `p₁ ∝ ξ̂ × a`.
pub fn polarization_frame(xi_hat: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let c = cross(xi_hat, polarization_axis());
    let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    let p1 = [c[0] / n, c[1] / n, c[2] / n];
    (p1, cross(xi_hat, p1))
}

/// Continuum initial data: a radial density per block and fixed
/// polarizations. `û₀ = i p₁ √ρ_u`, `ŵ₀ = i (ξ̂ + p₁)/√2 √ρ_w`,
/// `b̂₀ = p₂ √ρ_b`; u and b are transverse at every `ξ`, and all three
/// satisfy `v̂₀(−ξ) = conj v̂₀(ξ)`.
#[derive(Debug, Clone, Default)]
pub struct RadialDatum {
    pub u: Option<SpectralProfile>,
    pub w: Option<SpectralProfile>,
    pub b: Option<SpectralProfile>,
}

impl RadialDatum {
    pub fn all_blocks(profile: SpectralProfile) -> Self {
        Self {
            u: Some(profile.clone()),
            w: Some(profile.clone()),
            b: Some(profile),
        }
    }

    pub fn b_only(profile: SpectralProfile) -> Self {
        Self {
            b: Some(profile),
            ..Self::default()
        }
    }

    pub fn profiles(&self) -> [Option<&SpectralProfile>; 3] {
        [self.u.as_ref(), self.w.as_ref(), self.b.as_ref()]
    }

    /// `ẑ₀(ξ)` for `ξ ≠ 0`.
    pub fn coefficient(&self, xi: [f64; 3]) -> [Complex64; 9] {
        let rho = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        let mut out = [ZERO; 9];
        if rho == 0.0 {
            return out;
        }
        let xh = [xi[0] / rho, xi[1] / rho, xi[2] / rho];
        let (p1, p2) = polarization_frame(xh);
        let amp = |p: Option<&SpectralProfile>| p.map_or(0.0, |p| p.spectral_density(rho).max(0.0).sqrt());
        let [pu, pw, pb] = self.profiles();
        let (au, aw, ab) = (amp(pu), amp(pw), amp(pb));
        for d in 0..3 {
            out[d] = I * (p1[d] * au);
            out[3 + d] = I * ((xh[d] + p1[d]) * FRAC_1_SQRT_2 * aw);
            out[6 + d] = Complex64::new(p2[d] * ab, 0.0);
        }
        out
    }

    pub fn support_radius(&self) -> f64 {
        self.profiles()
            .into_iter()
            .flatten()
            .map(|p| p.support_radius())
            .fold(0.0, f64::max)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.profiles()
            .into_iter()
            .flatten()
            .map(|p| p.support_radius())
            .filter(|r| r.is_finite())
            .collect()
    }

    /// `‖z₀‖²`.
    pub fn total_mass(&self) -> Result<f64> {
        self.profiles().into_iter().flatten().map(|p| p.total_mass()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialConfig {
    pub rho_min: f64,
    pub rho_max: f64,
    pub panels_per_decade: usize,
    pub points: usize,
    /// Largest accepted relative change under doubling the panel count.
    pub doubling_tolerance: f64,
}

impl Default for RadialConfig {
    fn default() -> Self {
        Self {
            rho_min: 1e-4,
            rho_max: 1e2,
            panels_per_decade: 8,
            points: 8,
            doubling_tolerance: 1e-5,
        }
    }
}

impl RadialConfig {
    fn rule(&self, datum: &RadialDatum, panels_per_decade: usize) -> Result<LogRadialRule> {
        let upper = self.rho_max.min(datum.support_radius());
        if !(upper > self.rho_min) {
            return Err(Error::Contract(format!(
                "datum support {upper} lies below the radial window start {}",
                self.rho_min
            )));
        }
        LogRadialRule::with_breaks(self.rho_min, upper, panels_per_decade, self.points, &datum.breakpoints())
    }
}

/// Squared norms of a radial state at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialNorms {
    pub z: f64,
    pub u: f64,
    pub w: f64,
    pub b: f64,
    pub h1_z: f64,
    pub h1_w: f64,
}

impl RadialNorms {
    fn as_array(&self) -> [f64; 6] {
        [self.z, self.u, self.w, self.b, self.h1_z, self.h1_w]
    }
}

/// Initial data sampled on (radius × direction) nodes, with the symbol
/// decomposed at every node.
#[derive(Debug, Clone)]
pub struct RadialLinearState {
    pub rule: LogRadialRule,
    pub directions: Vec<([f64; 3], f64)>,
    /// Radius-major: node `(i, j)` sits at `i * directions.len() + j`.
    pub coeffs: Vec<Vec9>,
    bundles: Vec<EigenBundle>,
}

impl RadialLinearState {
    pub fn new(datum: &RadialDatum, params: &PhysParams, rule: LogRadialRule) -> Result<Self> {
        params.validate()?;
        let directions = lebedev26();
        let nodes: Vec<[f64; 3]> = rule
            .radii
            .iter()
            .flat_map(|&rho| directions.iter().map(move |(d, _)| [rho * d[0], rho * d[1], rho * d[2]]))
            .collect();
        let (coeffs, bundles) = nodes
            .par_iter()
            .map(|&xi| {
                let c = datum.coefficient(xi);
                (Vec9::from_column_slice(&c), assemble_symbol(xi, params).eigen())
            })
            .unzip();
        Ok(Self {
            rule,
            directions,
            coeffs,
            bundles,
        })
    }

    pub fn norms_at(&self, t: f64) -> Result<RadialNorms> {
        if !(t >= 0.0) {
            return Err(Error::Contract(format!("evolution time must be nonnegative, got {t}")));
        }
        let nd = self.directions.len();
        // Per radius: 4πρ² × sphere average of |û|², |ŵ|², |b̂|².
        let shells: Vec<[f64; 3]> = self
            .rule
            .radii
            .par_iter()
            .enumerate()
            .map(|(i, &rho)| {
                let mut acc = [0.0; 3];
                for (j, (_, wd)) in self.directions.iter().enumerate() {
                    let k = i * nd + j;
                    let v = self.bundles[k].apply_function(|l| (t * l).exp(), &self.coeffs[k]);
                    for (bi, a) in acc.iter_mut().enumerate() {
                        *a += wd * (0..3).map(|d| v[3 * bi + d].norm_sqr()).sum::<f64>();
                    }
                }
                acc.map(|a| 4.0 * PI * rho * rho * a)
            })
            .collect();
        let series = |f: &dyn Fn(usize, &[f64; 3]) -> f64| -> f64 {
            let g: Vec<f64> = shells.iter().enumerate().map(|(i, s)| f(i, s)).collect();
            self.rule.integrate_samples(&g)
        };
        let radii = &self.rule.radii;
        Ok(RadialNorms {
            z: series(&|_, s| s[0] + s[1] + s[2]),
            u: series(&|_, s| s[0]),
            w: series(&|_, s| s[1]),
            b: series(&|_, s| s[2]),
            h1_z: series(&|i, s| radii[i] * radii[i] * (s[0] + s[1] + s[2])),
            h1_w: series(&|i, s| radii[i] * radii[i] * s[1]),
        })
    }
}

/// Linear decay series from the radial solver.
#[derive(Debug, Clone, Serialize)]
pub struct RadialDecay {
    pub times: Vec<f64>,
    pub z: NormSeries,
    pub u: NormSeries,
    pub w: NormSeries,
    pub b: NormSeries,
    pub h1_z: NormSeries,
    pub h1_w: NormSeries,
    /// Largest relative change of any series under node doubling.
    pub doubling_error: f64,
}

fn evaluate(state: &RadialLinearState, times: &[f64]) -> Result<Vec<RadialNorms>> {
    times.iter().map(|&t| state.norms_at(t)).collect()
}

/// `‖z̄(t)‖²`, its blocks and `‖∇z̄(t)‖²`, `‖∇w̄(t)‖²` over `times`.
pub fn radial_linear_decay(
    datum: &RadialDatum,
    params: &PhysParams,
    times: &[f64],
    cfg: &RadialConfig,
) -> Result<RadialDecay> {
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Contract("times must be nonnegative and strictly increasing".into()));
    }
    let base = RadialLinearState::new(datum, params, cfg.rule(datum, cfg.panels_per_decade)?)?;
    let fine = RadialLinearState::new(datum, params, cfg.rule(datum, 2 * cfg.panels_per_decade)?)?;
    let coarse_vals = evaluate(&base, times)?;
    let fine_vals = evaluate(&fine, times)?;
    let mut doubling_error: f64 = 0.0;
    for (a, b) in coarse_vals.iter().zip(&fine_vals) {
        for (x, y) in a.as_array().into_iter().zip(b.as_array()) {
            if y > 0.0 {
                doubling_error = doubling_error.max((x - y).abs() / y);
            } else if x != 0.0 {
                doubling_error = f64::INFINITY;
            }
        }
    }
    if !(doubling_error <= cfg.doubling_tolerance) {
        return Err(Error::Numerical(format!(
            "radial quadrature changed by {doubling_error:e} under node doubling (tolerance {:e})",
            cfg.doubling_tolerance
        )));
    }
    let series = |name: &str, f: fn(&RadialNorms) -> f64| {
        NormSeries::new(name, times.to_vec(), fine_vals.iter().map(f).collect())
    };
    Ok(RadialDecay {
        times: times.to_vec(),
        z: series("z", |n| n.z),
        u: series("u", |n| n.u),
        w: series("w", |n| n.w),
        b: series("b", |n| n.b),
        h1_z: series("grad_z", |n| n.h1_z),
        h1_w: series("grad_w", |n| n.h1_w),
        doubling_error,
    })
}

/// `∫_{|ξ| ≤ g(t)} |ẑ̄(ξ, t)|² dξ` on the continuum, `g(t) = (A/(1+t))^{1/2}`.
pub fn radial_split_integral(
    datum: &RadialDatum,
    params: &PhysParams,
    t: f64,
    a: f64,
    cfg: &RadialConfig,
) -> Result<SplitIntegral> {
    if !(a > 0.0) || !(t >= 0.0) {
        return Err(Error::Contract(format!("need A > 0 and t >= 0, got A = {a}, t = {t}")));
    }
    let g = split_radius(t, a);
    let clipped = RadialConfig {
        rho_min: cfg.rho_min.min(g * 1e-3),
        rho_max: cfg.rho_max.min(g),
        ..*cfg
    };
    let state = RadialLinearState::new(datum, params, clipped.rule(datum, cfg.panels_per_decade)?)?;
    Ok(SplitIntegral {
        value: state.norms_at(t)?.z,
        radius: g,
        truncated: false,
    })
}

/// Sample a continuum datum on a grid: `ẑ(k) = ẑ₀(ξ_k) (Δξ³/V)^{1/2}`, so
/// that `V Σ |ẑ(k)|²` is the lattice Riemann sum of `∫ |ẑ₀|² dξ`. Mean and
/// Nyquist modes are zero.
pub fn realize_on_grid(datum: &RadialDatum, grid: Grid) -> StateField {
    let scale = (grid.fundamental().powi(3) / grid.volume()).sqrt();
    StateField::from_modes(grid, |idx| {
        if idx == 0 || grid.is_nyquist(idx) {
            return [ZERO; 9];
        }
        datum.coefficient(grid.wavevector(idx)).map(|c| c * scale)
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HeatBoundRow {
    pub t: f64,
    /// `‖e^{tΔ}f‖ / ‖f‖`
    pub l2_ratio: f64,
    /// `t^{1/2}‖∇e^{tΔ}f‖ / ‖f‖`
    pub grad_ratio: f64,
    /// `t^{3/4}‖e^{tΔ}f‖ / ‖f̂‖_∞`
    pub linf_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeatBoundReport {
    pub rows: Vec<HeatBoundRow>,
    pub k_l2: f64,
    pub k_grad: f64,
    pub k_linf: f64,
    /// Sharp constants `1`, `(2e)^{-1/2}`, `(π/2)^{3/4}`.
    pub sharp: [f64; 3],
    pub passed: bool,
}

/// Smallest admissible constants in the heat-kernel bounds
/// `‖∇^m e^{tΔ}f‖ ≤ K t^{-m/2}‖f‖` (m = 0, 1) and
/// `‖e^{tΔ}f‖ ≤ K t^{-3/4}‖f̂‖_∞`, measured on a radial scalar profile.
pub fn heat_bound_check(profile: &SpectralProfile, t_samples: &[f64], cfg: &RadialConfig) -> Result<HeatBoundReport> {
    let datum = RadialDatum::b_only(profile.clone());
    let rule = cfg.rule(&datum, cfg.panels_per_decade)?;
    let density: Vec<f64> = rule.radii.iter().map(|&r| profile.spectral_density(r)).collect();
    let integral = |t: f64, m: i32| {
        let g: Vec<f64> = rule
            .radii
            .iter()
            .zip(&density)
            .map(|(&r, d)| 4.0 * PI * r * r * r.powi(2 * m) * (-2.0 * t * r * r).exp() * d)
            .collect();
        rule.integrate_samples(&g)
    };
    let norm0 = integral(0.0, 0).sqrt();
    if !(norm0 > 0.0) {
        return Err(Error::Contract("heat-bound check needs a nonzero profile".into()));
    }
    let sup_hat = density.iter().fold(0.0f64, |m, d| m.max(d.sqrt()));
    let mut rows = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        if !(t > 0.0) {
            return Err(Error::Contract(format!("heat-bound samples need t > 0, got {t}")));
        }
        let l2 = integral(t, 0).sqrt();
        rows.push(HeatBoundRow {
            t,
            l2_ratio: l2 / norm0,
            grad_ratio: t.sqrt() * integral(t, 1).sqrt() / norm0,
            linf_ratio: t.powf(0.75) * l2 / sup_hat,
        });
    }
    let max = |f: fn(&HeatBoundRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let (k_l2, k_grad, k_linf) = (max(|r| r.l2_ratio), max(|r| r.grad_ratio), max(|r| r.linf_ratio));
    let sharp = [1.0, (2.0 * std::f64::consts::E).sqrt().recip(), (PI / 2.0).powf(0.75)];
    let passed = k_l2 <= sharp[0] * (1.0 + 1e-9) && k_grad <= sharp[1] * (1.0 + 1e-9) && k_linf <= sharp[2] * (1.0 + 1e-9);
    Ok(HeatBoundReport {
        rows,
        k_l2,
        k_grad,
        k_linf,
        sharp,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decay_character::{generate_data, DataSpec};

    fn params() -> PhysParams {
        PhysParams::new(1.0, 1.0, 0.5, 1.0).unwrap()
    }

    #[test]
    fn grid_semigroup_composes_and_contracts() {
        let grid = Grid::new(8, 2.0 * PI).unwrap();
        let z0 = generate_data(grid, &DataSpec::new(0.0, 3, 1.0)).unwrap();
        let sym = GridSymbols::new(grid, &params()).unwrap();
        let id = sym.evolve(&z0, 0.0).unwrap();
        assert!(id.sub(&z0).l2_norm_sq().sqrt() < 1e-14 * z0.l2_norm_sq().sqrt());
        let a = sym.evolve(&sym.evolve(&z0, 0.3).unwrap(), 0.2).unwrap();
        let b = sym.evolve(&z0, 0.5).unwrap();
        assert!(a.sub(&b).l2_norm_sq().sqrt() < 1e-12 * b.l2_norm_sq().sqrt());
        assert!(b.l2_norm_sq() < z0.l2_norm_sq());
        assert_eq!(b.conjugate_asymmetry(), 0.0);
        assert!(sym.evolve(&z0, -1.0).is_err());
    }

    #[test]
    fn frame_is_orthonormal_and_odd() {
        for xh in [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [-0.48, 0.6, 0.64]] {
            let (p1, p2) = polarization_frame(xh);
            let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            assert!(dot(p1, xh).abs() < 1e-15 && dot(p2, xh).abs() < 1e-15 && dot(p1, p2).abs() < 1e-15);
            assert!((dot(p1, p1) - 1.0).abs() < 1e-15 && (dot(p2, p2) - 1.0).abs() < 1e-15);
            let (q1, q2) = polarization_frame(xh.map(|x| -x));
            for d in 0..3 {
                assert!((q1[d] + p1[d]).abs() < 1e-15 && (q2[d] - p2[d]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn radial_initial_mass() {
        let datum = RadialDatum::all_blocks(SpectralProfile::power_gaussian(0.0, 1.0));
        let out = radial_linear_decay(&datum, &params(), &[0.0], &RadialConfig::default()).unwrap();
        let mass = datum.total_mass().unwrap();
        assert!((out.z.values[0] - mass).abs() < 1e-8 * mass);
        assert!(out.doubling_error < 1e-8);
    }

    #[test]
    fn realized_datum_is_real_and_solenoidal() {
        let grid = Grid::new(16, 4.0 * PI).unwrap();
        let datum = RadialDatum::all_blocks(SpectralProfile::power_gaussian(1.0, 1.0));
        let z = realize_on_grid(&datum, grid);
        assert!(z.conjugate_asymmetry() < 1e-15);
        let (du, db) = z.divergence_defect();
        assert!(du < 1e-14 && db < 1e-14);
    }

    #[test]
    fn heat_constants_for_gaussian() {
        let times: Vec<f64> = (0..40).map(|i| 10f64.powf(-2.0 + i as f64 / 8.0)).collect();
        let rep = heat_bound_check(&SpectralProfile::power_gaussian(0.0, 1.0), &times, &RadialConfig::default()).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.rows[0].l2_ratio > 0.98);
    }
}
