//! Decay indicators and decay-character estimation of initial data.
//!
//! A profile describes `|v̂₀(ξ)|²` through its ball mass
//! `E(ρ) = ∫_{|ξ|≤ρ} |v̂₀(ξ)|² dξ`. The decay indicator at finite radius is
//! `P_r(ρ) = ρ^{-2r-3} E(ρ)`; the decay character is read off the log-log
//! slope of `E` near the origin, `r* = (slope - 3)/2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::analysis::least_squares_line;
use crate::error::{Error, Result};
use crate::field::{leray_project, StateField};
use crate::grid::Grid;
use crate::quadrature::origin_integral;

/// Residual (max log deviation) above which a fit is a boundary case.
pub const BOUNDARY_RESIDUAL: f64 = 0.1;

/// Same for shell-binned grid data, whose lowest shells hold few modes.
pub const BOUNDARY_RESIDUAL_SAMPLED: f64 = 0.3;

const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileShape {
    /// `scale · ρ^{2r}` for `ρ ≤ radius`, zero beyond.
    PowerCutoff { r: f64, radius: f64, scale: f64 },
    /// `scale · ρ^{2r} exp(-ρ²/σ²)`.
    PowerGaussian { r: f64, sigma: f64, scale: f64 },
    /// Ball mass `E(ρ) = ρ³(1 + sin²(ln ρ))` for `ρ ≤ radius`; the limit
    /// defining the decay indicator does not exist for it.
    LogOscillating { radius: f64 },
    /// Pointwise sum of spectral densities.
    Sum(Vec<ProfileShape>),
    /// Shell masses at distinct radii, sorted ascending.
    Sampled { radii: Vec<f64>, masses: Vec<f64> },
    /// Density multiplied by a constant factor.
    Scaled { factor: f64, inner: Box<ProfileShape> },
}

impl ProfileShape {
    fn spectral_density(&self, rho: f64) -> f64 {
        match self {
            Self::PowerCutoff { r, radius, scale } => {
                if rho <= *radius {
                    scale * rho.powf(2.0 * r)
                } else {
                    0.0
                }
            }
            Self::PowerGaussian { r, sigma, scale } => {
                scale * rho.powf(2.0 * r) * (-(rho * rho) / (sigma * sigma)).exp()
            }
            Self::LogOscillating { radius } => {
                if rho <= *radius {
                    let l = rho.ln();
                    (3.0 + 3.0 * l.sin().powi(2) + (2.0 * l).sin()) / (4.0 * PI)
                } else {
                    0.0
                }
            }
            Self::Sum(parts) => parts.iter().map(|p| p.spectral_density(rho)).sum(),
            Self::Sampled { .. } => f64::NAN,
            Self::Scaled { factor, inner } => factor * inner.spectral_density(rho),
        }
    }

    fn support_radius(&self) -> f64 {
        match self {
            Self::PowerCutoff { radius, .. } | Self::LogOscillating { radius } => *radius,
            Self::PowerGaussian { .. } => f64::INFINITY,
            Self::Sum(parts) => parts.iter().map(|p| p.support_radius()).fold(0.0, f64::max),
            Self::Sampled { radii, .. } => radii.last().copied().unwrap_or(0.0),
            Self::Scaled { inner, .. } => inner.support_radius(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    pub shape: ProfileShape,
    pub description: String,
}

impl SpectralProfile {
    pub fn power_cutoff(r: f64, radius: f64) -> Self {
        Self {
            shape: ProfileShape::PowerCutoff { r, radius, scale: 1.0 },
            description: format!("|xi|^(2*{r}) on |xi| <= {radius}"),
        }
    }

    pub fn power_gaussian(r: f64, sigma: f64) -> Self {
        Self {
            shape: ProfileShape::PowerGaussian { r, sigma, scale: 1.0 },
            description: format!("|xi|^(2*{r}) exp(-|xi|^2/{sigma}^2)"),
        }
    }

    pub fn log_oscillating(radius: f64) -> Self {
        Self {
            shape: ProfileShape::LogOscillating { radius },
            description: "E(rho) = rho^3 (1 + sin^2 ln rho)".into(),
        }
    }

    /// Profile whose ball mass is the sum of the parts' ball masses.
    pub fn sum(parts: &[SpectralProfile]) -> Self {
        Self {
            shape: ProfileShape::Sum(parts.iter().map(|p| p.shape.clone()).collect()),
            description: parts
                .iter()
                .map(|p| p.description.as_str())
                .collect::<Vec<_>>()
                .join(" + "),
        }
    }

    /// Profile of `c·v̂₀` has density `c²|v̂₀|²`; here `factor` multiplies the
    /// density directly.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            shape: ProfileShape::Scaled {
                factor,
                inner: Box::new(self.shape.clone()),
            },
            description: format!("{factor} * ({})", self.description),
        }
    }

    pub fn is_sampled(&self) -> bool {
        fn sampled(s: &ProfileShape) -> bool {
            match s {
                ProfileShape::Sampled { .. } => true,
                ProfileShape::Scaled { inner, .. } => sampled(inner),
                ProfileShape::Sum(parts) => parts.iter().any(sampled),
                _ => false,
            }
        }
        sampled(&self.shape)
    }

    /// `|v̂₀|²` at radius `ρ` (analytic profiles).
    pub fn spectral_density(&self, rho: f64) -> f64 {
        self.shape.spectral_density(rho)
    }

    /// Shell-integrated density `dE/dρ = 4πρ² |v̂₀|²`.
    pub fn radial_density(&self, rho: f64) -> f64 {
        4.0 * PI * rho * rho * self.spectral_density(rho)
    }

    pub fn support_radius(&self) -> f64 {
        self.shape.support_radius()
    }

    /// `E(ρ) = ∫_{B(ρ)} |v̂₀|² dξ`.
    pub fn ball_integral(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::Contract(format!("ball radius must be positive, got {rho}")));
        }
        match &self.shape {
            ProfileShape::Sampled { radii, masses } => Ok(radii
                .iter()
                .zip(masses)
                .take_while(|(r, _)| **r <= rho * (1.0 + 1e-12))
                .map(|(_, m)| m)
                .sum()),
            ProfileShape::Sum(parts) => parts.iter().map(|p| of_shape(p).ball_integral(rho)).sum(),
            ProfileShape::Scaled { factor, inner } => Ok(factor * of_shape(inner).ball_integral(rho)?),
            _ => {
                let upper = rho.min(self.support_radius());
                origin_integral(&|s: f64| self.radial_density(s), upper, QUAD_TOL)
            }
        }
    }

    /// `‖v₀‖²`.
    pub fn total_mass(&self) -> Result<f64> {
        let support = self.support_radius();
        if support.is_finite() {
            return self.ball_integral(support);
        }
        match &self.shape {
            ProfileShape::PowerGaussian { sigma, .. } => self.ball_integral(40.0 * sigma),
            ProfileShape::Sum(parts) => parts.iter().map(|p| of_shape(p).total_mass()).sum(),
            ProfileShape::Scaled { factor, inner } => Ok(factor * of_shape(inner).total_mass()?),
            _ => Err(Error::Numerical("profile has unbounded support".into())),
        }
    }

    /// Sample radii for a fit window: log-spaced for analytic profiles, the
    /// distinct shell radii for sampled ones.
    fn window_radii(&self, window: [f64; 2], points: usize) -> Vec<f64> {
        match &self.shape {
            ProfileShape::Sampled { radii, .. } => radii
                .iter()
                .copied()
                .filter(|r| *r >= window[0] * (1.0 - 1e-12) && *r <= window[1] * (1.0 + 1e-12))
                .collect(),
            _ => {
                let (a, b) = (window[0].ln(), window[1].ln());
                (0..points)
                    .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
                    .collect()
            }
        }
    }
}

fn of_shape(shape: &ProfileShape) -> SpectralProfile {
    SpectralProfile {
        shape: shape.clone(),
        description: String::new(),
    }
}

/// `P_r(ρ) = ρ^{-2r-3} E(ρ)`.
pub fn decay_indicator(profile: &SpectralProfile, r: f64, rho: f64) -> Result<f64> {
    Ok(rho.powf(-2.0 * r - 3.0) * profile.ball_integral(rho)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayCharacterEstimate {
    /// `None` for boundary cases.
    pub r_star: Option<f64>,
    pub slope: f64,
    pub rho_window: [f64; 2],
    /// Largest absolute deviation of `ln E` from the fitted line.
    pub fit_residual: f64,
    pub boundary_case: bool,
    /// `(ρ, ρ^{-2r-3} E(ρ))` at the fitted `r = (slope-3)/2`.
    pub p_r_values: Vec<(f64, f64)>,
}

/// Default window for analytic profiles.
pub const ANALYTIC_WINDOW: [f64; 2] = [1e-3, 1e-1];

/// Lowest-shell window `[2π/L, 16π/L]` for data on a grid.
pub fn grid_window(grid: &Grid) -> [f64; 2] {
    [grid.fundamental(), 8.0 * grid.fundamental()]
}

pub fn estimate_decay_character(
    profile: &SpectralProfile,
    rho_window: [f64; 2],
) -> Result<DecayCharacterEstimate> {
    estimate_with_points(profile, rho_window, 33)
}

pub fn estimate_with_points(
    profile: &SpectralProfile,
    rho_window: [f64; 2],
    points: usize,
) -> Result<DecayCharacterEstimate> {
    if !(rho_window[0] > 0.0 && rho_window[0] < rho_window[1]) {
        return Err(Error::Contract(format!("bad window {rho_window:?}")));
    }
    if !profile.is_sampled() && rho_window[1] > profile.support_radius() {
        return Err(Error::Contract(format!(
            "window {rho_window:?} leaves the profile support {}",
            profile.support_radius()
        )));
    }
    if points < 8 {
        return Err(Error::Contract("need at least 8 points in the fit window".into()));
    }
    let radii = profile.window_radii(rho_window, points);
    if radii.len() < 3 {
        return Err(Error::Fit(format!(
            "only {} sample radii inside window {rho_window:?}",
            radii.len()
        )));
    }
    let mut xs = Vec::with_capacity(radii.len());
    let mut ys = Vec::with_capacity(radii.len());
    for &rho in &radii {
        let e = profile.ball_integral(rho)?;
        if !(e > 0.0) {
            return Err(Error::Fit(format!("ball mass vanishes at rho = {rho:e}")));
        }
        xs.push(rho.ln());
        ys.push(e.ln());
    }
    let (slope, intercept, residual) = least_squares_line(&xs, &ys)?;
    let r = (slope - 3.0) / 2.0;
    let threshold = if profile.is_sampled() {
        BOUNDARY_RESIDUAL_SAMPLED
    } else {
        BOUNDARY_RESIDUAL
    };
    let boundary = residual > threshold;
    let p_r_values = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x.exp(), (y - (2.0 * r + 3.0) * x).exp()))
        .collect();
    let _ = intercept;
    Ok(DecayCharacterEstimate {
        r_star: (!boundary).then_some(r),
        slope,
        rho_window,
        fit_residual: residual,
        boundary_case: boundary,
        p_r_values,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MinRuleReport {
    pub components: [f64; 3],
    pub combined: f64,
    pub minimum: f64,
    pub passed: bool,
}

/// Estimate the character of `(u, w, b)` from the summed shell masses and
/// compare it with the smallest component character.
pub fn min_rule_check(
    u: &SpectralProfile,
    w: &SpectralProfile,
    b: &SpectralProfile,
    rho_window: [f64; 2],
) -> Result<MinRuleReport> {
    let estimate = |p: &SpectralProfile| -> Result<f64> {
        let e = estimate_decay_character(p, rho_window)?;
        e.r_star.ok_or_else(|| {
            Error::Fit(format!(
                "boundary case for {} (residual {:.3})",
                p.description, e.fit_residual
            ))
        })
    };
    let components = [estimate(u)?, estimate(w)?, estimate(b)?];
    let combined = estimate(&SpectralProfile::sum(&[u.clone(), w.clone(), b.clone()]))?;
    let minimum = components.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MinRuleReport {
        components,
        combined,
        minimum,
        passed: (combined - minimum).abs() <= 0.1,
    })
}

/// Shell-binned profile of a grid state: the mass `V Σ |ẑ(k)|²` aggregated by
/// exact `|k|²`.
pub fn shell_profile(field: &StateField, blocks: [bool; 3]) -> SpectralProfile {
    let grid = &field.grid;
    let vol = grid.volume();
    let mut by_shell: std::collections::BTreeMap<i64, (usize, f64)> = Default::default();
    for idx in 0..grid.len() {
        let k = grid.mode(idx);
        let m2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if m2 == 0 {
            continue;
        }
        let mut mass = 0.0;
        for (bi, v) in field.blocks().into_iter().enumerate() {
            if blocks[bi] {
                mass += v.comps.iter().map(|c| c[idx].norm_sqr()).sum::<f64>();
            }
        }
        let shell = by_shell.entry(m2).or_default();
        shell.0 += 1;
        shell.1 += mass * vol;
    }
    // Place each shell at the radius of the continuum ball holding as many
    // lattice points, so that a flat density gives E ∝ ρ³ exactly.
    let dxi = grid.fundamental();
    let mut count = 0usize;
    let (radii, masses) = by_shell
        .into_iter()
        .map(|(_, (modes, mass))| {
            count += modes;
            ((3.0 * count as f64 / (4.0 * PI)).cbrt() * dxi, mass)
        })
        .unzip();
    SpectralProfile {
        shape: ProfileShape::Sampled { radii, masses },
        description: "shell-binned grid data".into(),
    }
}

/// Random initial data with a prescribed decay character.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataSpec {
    pub r: f64,
    pub seed: u64,
    /// Target `‖z₀‖_{L²}`.
    pub amplitude: f64,
    /// Gaussian cutoff width; defaults to `nπ/(4L)`.
    pub sigma: Option<f64>,
    /// Which of `(u, w, b)` are populated.
    pub blocks: [bool; 3],
}

impl DataSpec {
    pub fn new(r: f64, seed: u64, amplitude: f64) -> Self {
        Self {
            r,
            seed,
            amplitude,
            sigma: None,
            blocks: [true; 3],
        }
    }
}

pub fn default_sigma(grid: &Grid) -> f64 {
    grid.n() as f64 * PI / (4.0 * grid.length())
}

pub fn generate_data_with_character(grid: Grid, r: f64, seed: u64, amplitude: f64) -> Result<StateField> {
    generate_data(grid, &DataSpec::new(r, seed, amplitude))
}

/// `|ẑ₀(ξ)| ∝ |ξ|^r exp(-|ξ|²/2σ²)` per block, with random complex directions,
/// conjugate symmetry, zero mean and zero Nyquist modes; u and b are
/// Leray-projected after shaping and the result is scaled to
/// `‖z₀‖ = amplitude`.
pub fn generate_data(grid: Grid, spec: &DataSpec) -> Result<StateField> {
    if !(spec.r > -1.5 && spec.r < 6.0) {
        return Err(Error::Range(format!(
            "decay character {} outside the resolvable range (-3/2, 6)",
            spec.r
        )));
    }
    if !(spec.amplitude >= 0.0) {
        return Err(Error::Range(format!("amplitude must be nonnegative, got {}", spec.amplitude)));
    }
    let sigma = spec.sigma.unwrap_or_else(|| default_sigma(&grid));
    if !(sigma > 0.0) {
        return Err(Error::Range(format!("cutoff width must be positive, got {sigma}")));
    }
    let mut z = StateField::zeros(grid);
    if spec.amplitude == 0.0 {
        return Ok(z);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for idx in 0..grid.len() {
        let neg = grid.neg_index(idx);
        if grid.is_nyquist(idx) || neg <= idx {
            continue;
        }
        let rho = grid.wavevector_norm_sq(idx).sqrt();
        let mag = rho.powf(spec.r) * (-(rho * rho) / (2.0 * sigma * sigma)).exp();
        for (bi, on) in spec.blocks.iter().enumerate() {
            let mut v = [Complex64::new(0.0, 0.0); 3];
            for x in v.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *x = Complex64::new(re, im);
            }
            if !on {
                continue;
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            let target = match bi {
                0 => &mut z.u,
                1 => &mut z.w,
                _ => &mut z.b,
            };
            for d in 0..3 {
                let c = v[d] * (mag / norm);
                target.comps[d][idx] = c;
                target.comps[d][neg] = c.conj();
            }
        }
    }
    z.u = leray_project(&grid, &z.u);
    z.b = leray_project(&grid, &z.b);
    let norm = z.l2_norm_sq().sqrt();
    if norm == 0.0 {
        return Ok(z);
    }
    Ok(z.scaled(spec.amplitude / norm))
}
