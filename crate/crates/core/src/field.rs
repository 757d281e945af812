//! Spectral vector fields and the nine-component state `z = (u, w, b)`.
//!
//! Norms follow Plancherel on the box: `‖f‖² = V Σ_k |f̂(k)|²`, which agrees
//! with the physical-space quadrature `(V/n³) Σ_j |f(x_j)|²` for the
//! normalization used by [`crate::fft::Fft3`].

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::{conjugate_asymmetry, symmetrize, Fft3};
use crate::grid::Grid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Three spectral components over all grid modes.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub comps: [Vec<Complex64>; 3],
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        let len = grid.len();
        Self {
            comps: [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]],
        }
    }

    pub fn len(&self) -> usize {
        self.comps[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps[0].is_empty()
    }

    pub fn at(&self, idx: usize) -> [Complex64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn set(&mut self, idx: usize, v: [Complex64; 3]) {
        for (d, c) in v.into_iter().enumerate() {
            self.comps[d][idx] = c;
        }
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Contract(format!(
                "vector field length {} does not match grid with {} modes",
                self.len(),
                grid.len()
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            comps: self.comps.clone().map(|c| c.into_iter().map(|x| x * s).collect()),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for d in 0..3 {
            for (a, b) in out.comps[d].iter_mut().zip(&other.comps[d]) {
                *a -= b;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for d in 0..3 {
            for (a, b) in out.comps[d].iter_mut().zip(&other.comps[d]) {
                *a += b;
            }
        }
        out
    }

    /// Apply a per-mode mask, zeroing modes where `keep` is false.
    pub fn masked(&self, keep: &[bool]) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for (x, &k) in c.iter_mut().zip(keep) {
                if !k {
                    *x = ZERO;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, x| m.max(x.norm()))
    }

    pub fn conjugate_asymmetry(&self, grid: &Grid) -> f64 {
        self.comps
            .iter()
            .map(|c| conjugate_asymmetry(grid, c))
            .fold(0.0, f64::max)
    }

    pub fn symmetrized(&self, grid: &Grid) -> Self {
        Self {
            comps: [
                symmetrize(grid, &self.comps[0]),
                symmetrize(grid, &self.comps[1]),
                symmetrize(grid, &self.comps[2]),
            ],
        }
    }
}

/// Physical-parameter set of the system.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysParams {
    pub mu: f64,
    pub gamma: f64,
    pub chi: f64,
    pub nu: f64,
}

impl PhysParams {
    pub fn new(mu: f64, gamma: f64, chi: f64, nu: f64) -> Result<Self> {
        let p = Self { mu, gamma, chi, nu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.mu > 0.0
            && self.gamma > 0.0
            && self.nu > 0.0
            && self.chi >= 0.0
            && [self.mu, self.gamma, self.chi, self.nu]
                .iter()
                .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "need mu, gamma, nu > 0 and chi >= 0, got {self:?}"
            )))
        }
    }

    /// `32 χ (μ + χ + γ)`.
    pub fn bound_product(&self) -> f64 {
        32.0 * self.chi * (self.mu + self.chi + self.gamma)
    }

    pub fn bound_valid(&self) -> bool {
        self.bound_product() > 1.0
    }
}

/// Which sub-field of the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    U,
    W,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub grid: Grid,
    pub u: VectorField,
    pub w: VectorField,
    pub b: VectorField,
    pub solenoidal_u: bool,
    pub solenoidal_b: bool,
}

impl StateField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            u: VectorField::zeros(&grid),
            w: VectorField::zeros(&grid),
            b: VectorField::zeros(&grid),
            solenoidal_u: true,
            solenoidal_b: true,
        }
    }

    pub fn block(&self, which: Block) -> &VectorField {
        match which {
            Block::U => &self.u,
            Block::W => &self.w,
            Block::B => &self.b,
        }
    }

    pub fn blocks(&self) -> [&VectorField; 3] {
        [&self.u, &self.w, &self.b]
    }

    pub fn check(&self) -> Result<()> {
        for v in self.blocks() {
            v.check_grid(&self.grid)?;
        }
        Ok(())
    }

    /// The nine coefficients of mode `idx`, ordered `(u, w, b)`.
    pub fn mode_vector(&self, idx: usize) -> [Complex64; 9] {
        let mut out = [ZERO; 9];
        for (bi, v) in self.blocks().into_iter().enumerate() {
            for d in 0..3 {
                out[3 * bi + d] = v.comps[d][idx];
            }
        }
        out
    }

    /// Build a state from a per-mode map producing nine coefficients.
    pub fn from_modes<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(usize) -> [Complex64; 9] + Sync + Send,
    {
        let vals: Vec<[Complex64; 9]> = (0..grid.len()).into_par_iter().map(f).collect();
        let mut out = Self::zeros(grid);
        for (idx, v) in vals.iter().enumerate() {
            for d in 0..3 {
                out.u.comps[d][idx] = v[d];
                out.w.comps[d][idx] = v[3 + d];
                out.b.comps[d][idx] = v[6 + d];
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            grid: self.grid,
            u: self.u.sub(&other.u),
            w: self.w.sub(&other.w),
            b: self.b.sub(&other.b),
            solenoidal_u: self.solenoidal_u && other.solenoidal_u,
            solenoidal_b: self.solenoidal_b && other.solenoidal_b,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            grid: self.grid,
            u: self.u.add(&other.u),
            w: self.w.add(&other.w),
            b: self.b.add(&other.b),
            solenoidal_u: self.solenoidal_u && other.solenoidal_u,
            solenoidal_b: self.solenoidal_b && other.solenoidal_b,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            u: self.u.scaled(s),
            w: self.w.scaled(s),
            b: self.b.scaled(s),
            ..*self
        }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.blocks()
            .into_iter()
            .map(|v| l2_norm_sq(&self.grid, v))
            .sum()
    }

    pub fn gradient_norm_sq(&self) -> f64 {
        self.blocks()
            .into_iter()
            .map(|v| gradient_norm_sq(&self.grid, v))
            .sum()
    }

    /// `‖D²z‖² = Σ |ξ|⁴ |ẑ|²`.
    pub fn hessian_norm_sq(&self) -> f64 {
        self.blocks()
            .into_iter()
            .map(|v| weighted_norm_sq(&self.grid, v, |k2| k2 * k2))
            .sum()
    }

    pub fn conjugate_asymmetry(&self) -> f64 {
        self.blocks()
            .into_iter()
            .map(|v| v.conjugate_asymmetry(&self.grid))
            .fold(0.0, f64::max)
    }

    /// Largest `|ξ·v̂| / max|v̂|` over modes for u and b.
    pub fn divergence_defect(&self) -> (f64, f64) {
        (
            relative_divergence(&self.grid, &self.u),
            relative_divergence(&self.grid, &self.b),
        )
    }
}

/// `‖f‖² = V Σ |f̂|²`, summed sequentially in mode order.
pub fn l2_norm_sq(grid: &Grid, v: &VectorField) -> f64 {
    weighted_norm_sq(grid, v, |_| 1.0)
}

/// `‖∇f‖² = V Σ |ξ|² |f̂|²`.
pub fn gradient_norm_sq(grid: &Grid, v: &VectorField) -> f64 {
    weighted_norm_sq(grid, v, |k2| k2)
}

/// `V Σ weight(|ξ|²) |f̂(ξ)|²` with a fixed summation order.
pub fn weighted_norm_sq<W: Fn(f64) -> f64>(grid: &Grid, v: &VectorField, weight: W) -> f64 {
    let mut total = 0.0;
    for idx in 0..grid.len() {
        let w = weight(grid.wavevector_norm_sq(idx));
        let m: f64 = v.comps.iter().map(|c| c[idx].norm_sqr()).sum();
        total += w * m;
    }
    total * grid.volume()
}

/// `ŵ = v̂ − ξ(ξ·v̂)/|ξ|²`; the mean mode passes through.
pub fn leray_project(grid: &Grid, v: &VectorField) -> VectorField {
    let mut out = v.clone();
    for idx in 0..grid.len() {
        let xi = grid.wavevector(idx);
        let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if k2 == 0.0 {
            continue;
        }
        let c = v.at(idx);
        let dot = c[0] * xi[0] + c[1] * xi[1] + c[2] * xi[2];
        let s = dot / k2;
        out.set(idx, [c[0] - s * xi[0], c[1] - s * xi[1], c[2] - s * xi[2]]);
    }
    out
}

/// Spectral divergence `iξ·v̂`, one scalar per mode.
pub fn divergence(grid: &Grid, v: &VectorField) -> Vec<Complex64> {
    (0..grid.len())
        .map(|idx| {
            let xi = grid.wavevector(idx);
            let c = v.at(idx);
            I * (c[0] * xi[0] + c[1] * xi[1] + c[2] * xi[2])
        })
        .collect()
}

/// Spectral curl `iξ × v̂`.
pub fn curl(grid: &Grid, v: &VectorField) -> VectorField {
    let mut out = VectorField::zeros(grid);
    for idx in 0..grid.len() {
        let x = grid.wavevector(idx);
        let c = v.at(idx);
        out.set(
            idx,
            [
                I * (c[2] * x[1] - c[1] * x[2]),
                I * (c[0] * x[2] - c[2] * x[0]),
                I * (c[1] * x[0] - c[0] * x[1]),
            ],
        );
    }
    out
}

/// Spectral gradient `iξ ĝ` of a scalar field.
pub fn gradient(grid: &Grid, g: &[Complex64]) -> VectorField {
    let mut out = VectorField::zeros(grid);
    for (idx, &c) in g.iter().enumerate() {
        let x = grid.wavevector(idx);
        out.set(idx, [I * c * x[0], I * c * x[1], I * c * x[2]]);
    }
    out
}

fn relative_divergence(grid: &Grid, v: &VectorField) -> f64 {
    let scale = v.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for idx in 0..grid.len() {
        let xi = grid.wavevector(idx);
        let k = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        if k == 0.0 {
            continue;
        }
        let c = v.at(idx);
        let d = (c[0] * xi[0] + c[1] * xi[1] + c[2] * xi[2]).norm() / k;
        worst = worst.max(d);
    }
    worst / scale
}

/// Inverse-then-forward transform of every component.
pub fn transform_roundtrip(fft: &Fft3, field: &StateField) -> Result<StateField> {
    if fft.grid() != field.grid {
        return Err(Error::Contract("transform grid differs from field grid".into()));
    }
    field.check()?;
    let go = |v: &VectorField| -> Result<VectorField> {
        let mut out = VectorField::zeros(&field.grid);
        for d in 0..3 {
            let phys = fft.inverse_real(&v.comps[d])?;
            out.comps[d] = fft.forward_real(&phys)?;
        }
        Ok(out)
    };
    Ok(StateField {
        u: go(&field.u)?,
        w: go(&field.w)?,
        b: go(&field.b)?,
        ..field.clone()
    })
}

/// Physical-space trapezoidal quadrature of `|f|²`, used to audit Plancherel.
pub fn physical_l2_norm_sq(fft: &Fft3, v: &VectorField) -> Result<f64> {
    let grid = fft.grid();
    let mut total = 0.0;
    for d in 0..3 {
        let phys = fft.inverse_real(&v.comps[d])?;
        total += phys.iter().map(|x| x * x).sum::<f64>();
    }
    Ok(total * grid.volume() / grid.len() as f64)
}
