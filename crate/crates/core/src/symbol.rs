//! The 9×9 Fourier symbol of the linearized system and its exact semigroup.
//!
//! Blocks are ordered `(u, w, b)`:
//!
//! ```text
//!         ⎡ −(μ+χ)|ξ|² I      iχR(ξ)                   0      ⎤
//! M(ξ) =  ⎢ iχR(ξ)            −(γ|ξ|²+2χ) I − ξξᵀ       0      ⎥
//!         ⎣ 0                 0                        −ν|ξ|² I ⎦
//! ```
//!
//! with `R(ξ)` the antisymmetric matrix with rows `(0, ξ₃, −ξ₂)`,
//! `(−ξ₃, 0, ξ₁)`, `(ξ₂, −ξ₁, 0)`, so `R(ξ)v = −ξ × v`.

use nalgebra::{Matrix3, SMatrix, SVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::PhysParams;

pub type Mat9 = SMatrix<Complex64, 9, 9>;
pub type Vec9 = SVector<Complex64, 9>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn norm_sq(xi: [f64; 3]) -> f64 {
    xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
}

/// `iR(ξ)`, Hermitian with spectrum `{−|ξ|, 0, |ξ|}`.
pub fn rotation_symbol(xi: [f64; 3]) -> Matrix3<Complex64> {
    let [x1, x2, x3] = xi;
    let i = Complex64::new(0.0, 1.0);
    Matrix3::new(
        ZERO,
        i * x3,
        -i * x2,
        -i * x3,
        ZERO,
        i * x1,
        i * x2,
        -i * x1,
        ZERO,
    )
}

#[derive(Debug, Clone)]
pub struct SymbolMatrix {
    pub xi: [f64; 3],
    pub entries: Mat9,
    pub params: PhysParams,
}

pub fn assemble_symbol(xi: [f64; 3], params: &PhysParams) -> SymbolMatrix {
    let k2 = norm_sq(xi);
    let rot = rotation_symbol(xi) * c(params.chi);
    let mut m = Mat9::zeros();
    for a in 0..3 {
        m[(a, a)] = c(-(params.mu + params.chi) * k2);
        m[(3 + a, 3 + a)] = c(-(params.gamma * k2 + 2.0 * params.chi));
        m[(6 + a, 6 + a)] = c(-params.nu * k2);
        for b in 0..3 {
            m[(a, 3 + b)] = rot[(a, b)];
            m[(3 + a, b)] = rot[(a, b)];
            m[(3 + a, 3 + b)] -= c(xi[a] * xi[b]);
        }
    }
    SymbolMatrix {
        xi,
        entries: m,
        params: *params,
    }
}

impl SymbolMatrix {
    /// Largest entry of `|M − M*|`.
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.entries - self.entries.adjoint();
        d.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    pub fn eigen(&self) -> EigenBundle {
        EigenBundle::from_hermitian(&self.entries)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigen().eigenvalues[0]
    }
}

/// Eigendecomposition `M = U diag(λ) U*` of a Hermitian 9×9 matrix.
#[derive(Debug, Clone)]
pub struct EigenBundle {
    /// Sorted descending.
    pub eigenvalues: [f64; 9],
    pub unitary: Mat9,
}

impl EigenBundle {
    pub fn from_hermitian(m: &Mat9) -> Self {
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..9).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut eigenvalues = [0.0; 9];
        let mut unitary = Mat9::zeros();
        for (j, &src) in order.iter().enumerate() {
            eigenvalues[j] = eig.eigenvalues[src];
            unitary.set_column(j, &eig.eigenvectors.column(src));
        }
        Self {
            eigenvalues,
            unitary,
        }
    }

    /// `U f(λ) U* v`.
    pub fn apply_function<F: Fn(f64) -> f64>(&self, f: F, v: &Vec9) -> Vec9 {
        let mut y = self.unitary.ad_mul(v);
        for (j, yj) in y.iter_mut().enumerate() {
            *yj *= f(self.eigenvalues[j]);
        }
        self.unitary * y
    }

    /// `U f(λ) U*` as a dense matrix.
    pub fn function_matrix<F: Fn(f64) -> f64>(&self, f: F) -> Mat9 {
        let mut scaled = self.unitary;
        for j in 0..9 {
            let s = f(self.eigenvalues[j]);
            for i in 0..9 {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.unitary.adjoint()
    }

    pub fn unitarity_defect(&self) -> f64 {
        let d = self.unitary * self.unitary.adjoint() - Mat9::identity();
        d.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    pub fn reconstruction_error(&self, m: &Mat9) -> f64 {
        let r = self.function_matrix(|l| l);
        (r - m).norm() / m.norm().max(f64::MIN_POSITIVE)
    }

    /// `e^{tM} v`.
    pub fn semigroup_apply(&self, t: f64, v: &Vec9) -> Result<Vec9> {
        if !(t >= 0.0) {
            return Err(Error::Contract(format!("semigroup time must be nonnegative, got {t}")));
        }
        Ok(self.apply_function(|l| (t * l).exp(), v))
    }
}

/// `e^{tM(ξ)} v` from a fresh eigendecomposition.
pub fn semigroup_apply(m: &SymbolMatrix, t: f64, v: &Vec9) -> Result<Vec9> {
    m.eigen().semigroup_apply(t, v)
}

/// The four-way minimum
/// `min{(μ+χ+γ)|ξ|² − |ξ|/2 + 2χ, (μ+χ)|ξ|², γ|ξ|² + 2χ, 2ν|ξ|²}`.
pub fn spectral_bound(xi: [f64; 3], params: &PhysParams) -> Result<f64> {
    if !params.bound_valid() {
        return Err(Error::BoundInvalid {
            product: params.bound_product(),
        });
    }
    let k2 = norm_sq(xi);
    let k = k2.sqrt();
    let PhysParams { mu, gamma, chi, nu } = *params;
    Ok([
        (mu + chi + gamma) * k2 - 0.5 * k + 2.0 * chi,
        (mu + chi) * k2,
        gamma * k2 + 2.0 * chi,
        2.0 * nu * k2,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min))
}

/// Wavevectors with log-uniform radius in `[rho_min, rho_max]` and uniformly
/// distributed directions.
pub fn sample_wavevectors(count: usize, rho_min: f64, rho_max: f64, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (rho_min.ln(), rho_max.ln());
    (0..count)
        .map(|_| {
            let rho = rng.random_range(lo..=hi).exp();
            let z: f64 = rng.random_range(-1.0..=1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - z * z).max(0.0).sqrt();
            [rho * s * phi.cos(), rho * s * phi.sin(), rho * z]
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n_samples: usize,
    /// Largest `λ_max(M(ξ)) + spectral_bound(ξ)`; nonpositive when the
    /// explicit bound holds everywhere.
    pub max_violation: f64,
    pub worst_xi: [f64; 3],
    /// `inf spectral_bound(ξ)/|ξ|²` over the samples.
    pub empirical_c: f64,
    /// `inf −λ_max(M(ξ))/|ξ|²` over the samples: the constant actually
    /// realized in `λ_max ≤ −C|ξ|²`.
    pub lemma_constant: f64,
    /// Samples where `λ_max > −spectral_bound + 1e-10`.
    pub violations: usize,
}

pub fn verify_eigenvalue_bound(params: &PhysParams, samples: &[[f64; 3]]) -> Result<BoundReport> {
    let mut report = BoundReport {
        n_samples: samples.len(),
        max_violation: f64::NEG_INFINITY,
        worst_xi: [0.0; 3],
        empirical_c: f64::INFINITY,
        lemma_constant: f64::INFINITY,
        violations: 0,
    };
    for &xi in samples {
        let bound = spectral_bound(xi, params)?;
        let lmax = assemble_symbol(xi, params).lambda_max();
        let violation = lmax + bound;
        if violation > 1e-10 {
            report.violations += 1;
        }
        if violation > report.max_violation {
            report.max_violation = violation;
            report.worst_xi = xi;
        }
        let k2 = norm_sq(xi);
        if k2 > 0.0 {
            report.empirical_c = report.empirical_c.min(bound / k2);
            report.lemma_constant = report.lemma_constant.min(-lmax / k2);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct RayleighReport {
    /// Largest entry of `|G − I|` for the Gram matrix of the basis.
    pub gram_defect: f64,
    /// `v*Mv` per basis vector.
    pub quotients: [f64; 9],
    /// `v*M₁v`, `v*M₂v`, `v*M₃v` per basis vector.
    pub diagonal_part: [f64; 9],
    pub stretching_part: [f64; 9],
    pub coupling_part: [f64; 9],
    pub bound: f64,
    /// Largest `v*Mv + bound` over the basis.
    pub max_excess: f64,
}

/// Eigenvectors of `iR(ξ)` for eigenvalues `−|ξ|, 0, |ξ|`.
fn rotation_eigenvectors(xi: [f64; 3]) -> Result<[SVector<Complex64, 3>; 3]> {
    let eig = rotation_symbol(xi).symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vs = order.map(|j| eig.eigenvectors.column(j).into_owned());
    let mut defect: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let g = vs[a].dotc(&vs[b]);
            let target = if a == b { 1.0 } else { 0.0 };
            defect = defect.max((g - c(target)).norm());
        }
    }
    if defect > 1e-12 {
        return Err(Error::DegenerateEigenvectors(format!(
            "rotation eigenvectors not orthonormal (defect {defect:e})"
        )));
    }
    Ok(vs)
}

/// The nine vectors `(v₁,v₁,0), (v₃,−v₃,0), (v₂,v₂,0), (v₂,−v₂,0), (v₃,v₃,0),
/// (v₁,−v₁,0)` (each scaled by `1/√2`) followed by `e₇, e₈, e₉`.
pub fn rayleigh_basis(xi: [f64; 3]) -> Result<[Vec9; 9]> {
    let [v1, v2, v3] = rotation_eigenvectors(xi)?;
    let s = c(std::f64::consts::FRAC_1_SQRT_2);
    let pair = |a: &SVector<Complex64, 3>, sign: f64| {
        let mut out = Vec9::zeros();
        for d in 0..3 {
            out[d] = a[d] * s;
            out[3 + d] = a[d] * s * sign;
        }
        out
    };
    let unit = |j: usize| {
        let mut out = Vec9::zeros();
        out[j] = c(1.0);
        out
    };
    Ok([
        pair(&v1, 1.0),
        pair(&v3, -1.0),
        pair(&v2, 1.0),
        pair(&v2, -1.0),
        pair(&v3, 1.0),
        pair(&v1, -1.0),
        unit(6),
        unit(7),
        unit(8),
    ])
}

pub fn rayleigh_basis_check(xi: [f64; 3], params: &PhysParams) -> Result<RayleighReport> {
    if norm_sq(xi) == 0.0 {
        return Err(Error::Contract("Rayleigh basis needs a nonzero wavevector".into()));
    }
    let bound = spectral_bound(xi, params)?;
    let basis = rayleigh_basis(xi)?;
    let full = assemble_symbol(xi, params).entries;

    // M = M₁ + M₂ + M₃: diagonal, −ξξᵀ on the w block, and the curl coupling
    let mut m1 = Mat9::zeros();
    let mut m2 = Mat9::zeros();
    for a in 0..9 {
        m1[(a, a)] = full[(a, a)];
    }
    for a in 0..3 {
        m1[(3 + a, 3 + a)] += c(xi[a] * xi[a]);
        for b in 0..3 {
            m2[(3 + a, 3 + b)] = c(-xi[a] * xi[b]);
        }
    }
    let m3 = full - m1 - m2;

    let mut gram_defect: f64 = 0.0;
    for a in 0..9 {
        for b in 0..9 {
            let g = basis[a].dotc(&basis[b]);
            let target = if a == b { 1.0 } else { 0.0 };
            gram_defect = gram_defect.max((g - c(target)).norm());
        }
    }
    let quad = |m: &Mat9, v: &Vec9| v.dotc(&(m * v)).re;
    let mut report = RayleighReport {
        gram_defect,
        quotients: [0.0; 9],
        diagonal_part: [0.0; 9],
        stretching_part: [0.0; 9],
        coupling_part: [0.0; 9],
        bound,
        max_excess: f64::NEG_INFINITY,
    };
    for (j, v) in basis.iter().enumerate() {
        let q = quad(&full, v);
        report.quotients[j] = q;
        report.diagonal_part[j] = quad(&m1, v);
        report.stretching_part[j] = quad(&m2, v);
        report.coupling_part[j] = quad(&m3, v);
        let excess = q + bound * v.norm_squared();
        report.max_excess = report.max_excess.max(excess);
    }
    Ok(report)
}
