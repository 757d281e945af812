//! Pseudo-spectral integration of the full system on the periodic box.
//!
//! The linear block is propagated exactly through the cached
//! eigendecompositions of `M(ξ)`; advection, stretching and the Lorentz
//! force are explicit. Products are formed in divergence form,
//! `(F·∇)G = ∇·(F ⊗ G)`, valid because u and b are solenoidal.

use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::fourier_split_integral;
use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::{leray_project, PhysParams, StateField, VectorField};
use crate::grid::Grid;
use crate::linear::{GridSymbols, ModeWeights};

/// Relative `|ξ·v̂|/|ξ|` accepted on input to the nonlinear term.
pub const SOLENOIDAL_TOLERANCE: f64 = 1e-9;

/// Courant limit on `dt · max|u| · n / L`.
pub const CFL_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    EtdRk2,
    IfRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Dealias {
    #[default]
    TwoThirds,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid,
    pub params: PhysParams,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: Dealias,
    pub output_every: usize,
    pub scheme: Scheme,
    /// Fourier-splitting constant `A` in `g²(t) = A/(1+t)`.
    pub split_a: f64,
    /// Also evolve the linear system from the same data and record
    /// difference norms.
    pub paired_linear: bool,
    pub save_snapshots: bool,
}

impl SolverConfig {
    pub fn new(grid: Grid, params: PhysParams, dt: f64, t_end: f64) -> Self {
        Self {
            grid,
            params,
            dt,
            t_end,
            dealias: Dealias::TwoThirds,
            output_every: 1,
            scheme: Scheme::EtdRk2,
            split_a: 2.5,
            paired_linear: false,
            save_snapshots: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return Err(Error::Config(format!(
                "need dt > 0 and t_end >= 0, got dt = {}, t_end = {}",
                self.dt, self.t_end
            )));
        }
        if self.output_every == 0 {
            return Err(Error::Config("output_every must be positive".into()));
        }
        if !(self.split_a > 0.0) {
            return Err(Error::Config(format!("split constant must be positive, got {}", self.split_a)));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::Config(format!(
                "t_end = {} is not a whole number of steps of {}",
                self.t_end, self.dt
            )));
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * (0.5 + x * (1.0 / 6.0 + x / 24.0))
    } else {
        x.exp_m1() / x
    }
}

fn phi2(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x * (1.0 / 120.0 + x * (1.0 / 720.0 + x / 5040.0))))
    } else {
        (x.exp_m1() - x) / (x * x)
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Grid, transforms, dealiasing mask and symbol cache for one run.
pub struct Solver {
    cfg: SolverConfig,
    fft: Fft3,
    symbols: GridSymbols,
    keep: Vec<bool>,
    weights: Mutex<Vec<Arc<StepWeights>>>,
}

/// Eigenvalue weight tables for one step size.
struct StepWeights {
    h: f64,
    tables: Vec<ModeWeights>,
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid;
        let keep = (0..grid.len())
            .map(|idx| match cfg.dealias {
                Dealias::TwoThirds => grid.keeps_two_thirds(idx),
                Dealias::None => !grid.is_nyquist(idx),
            })
            .collect();
        Ok(Self {
            symbols: GridSymbols::new(grid, &cfg.params)?,
            fft: Fft3::new(grid),
            keep,
            cfg,
            weights: Mutex::new(Vec::new()),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn symbols(&self) -> &GridSymbols {
        &self.symbols
    }

    /// `dt · max|λ(M)|`, reported but not enforced.
    pub fn stability_proxy(&self, dt: f64) -> f64 {
        dt * self.symbols.spectral_radius()
    }

    pub fn cfl_number(&self, dt: f64, speed: f64) -> f64 {
        dt * speed * self.cfg.grid.n() as f64 / self.cfg.grid.length()
    }

    /// `NL(u, w, b)` in spectral space.
    pub fn nonlinear_rhs(&self, z: &StateField) -> Result<StateField> {
        self.check_input(z)?;
        Ok(self.rhs_with_speed(z)?.0)
    }

    /// `max |u(x)|` over grid points.
    pub fn max_speed(&self, z: &StateField) -> Result<f64> {
        let u = self.to_physical(&z.u)?;
        Ok(speed(&u))
    }

    fn check_input(&self, z: &StateField) -> Result<()> {
        if z.grid != self.cfg.grid {
            return Err(Error::Contract("state grid differs from solver grid".into()));
        }
        z.check()?;
        let (du, db) = z.divergence_defect();
        if du > SOLENOIDAL_TOLERANCE || db > SOLENOIDAL_TOLERANCE {
            return Err(Error::Contract(format!(
                "nonlinear term needs solenoidal u and b; relative divergence u: {du:e}, b: {db:e}"
            )));
        }
        Ok(())
    }

    fn to_physical(&self, v: &VectorField) -> Result<[Vec<f64>; 3]> {
        let m = v.masked(&self.keep);
        let (x, y) = self.fft.inverse_real_pair(&m.comps[0], &m.comps[1])?;
        Ok([x, y, self.fft.inverse_real(&m.comps[2])?])
    }

    /// Forward transforms of real products, two per complex FFT.
    fn products(&self, fs: &[&(dyn Fn(usize) -> f64 + Sync)]) -> Result<Vec<Vec<Complex64>>> {
        let npts = self.cfg.grid.len();
        let mut out = Vec::with_capacity(fs.len());
        for pair in fs.chunks(2) {
            let p: Vec<f64> = (0..npts).map(pair[0]).collect();
            let q: Vec<f64> = match pair.get(1) {
                Some(f) => (0..npts).map(f).collect(),
                None => vec![0.0; npts],
            };
            let (a, b) = self.fft.forward_real_pair(&p, &q)?;
            out.push(a);
            if pair.len() == 2 {
                out.push(b);
            }
        }
        Ok(out)
    }

    /// Nonlinear term and `max|u|`, without the input audit.
    fn rhs_with_speed(&self, z: &StateField) -> Result<(StateField, f64)> {
        let grid = self.cfg.grid;
        let u = self.to_physical(&z.u)?;
        let w = self.to_physical(&z.w)?;
        let b = self.to_physical(&z.b)?;
        // s(j,i) = u_j u_i − b_j b_i (symmetric), t(j,i) = u_j w_i,
        // a(j,i) = b_j u_i − u_j b_i (antisymmetric)
        let (u, w, b) = (&u, &w, &b);
        let mut fs: Vec<Box<dyn Fn(usize) -> f64 + Sync>> = Vec::with_capacity(18);
        for (j, i) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] {
            fs.push(Box::new(move |x| u[j][x] * u[i][x] - b[j][x] * b[i][x]));
        }
        for j in 0..3 {
            for i in 0..3 {
                fs.push(Box::new(move |x| u[j][x] * w[i][x]));
            }
        }
        for (j, i) in [(0, 1), (0, 2), (1, 2)] {
            fs.push(Box::new(move |x| b[j][x] * u[i][x] - u[j][x] * b[i][x]));
        }
        let refs: Vec<&(dyn Fn(usize) -> f64 + Sync)> = fs.iter().map(|f| f.as_ref()).collect();
        let hat = self.products(&refs)?;
        let sym_slot = |j: usize, i: usize| {
            let (a, b) = if j <= i { (j, i) } else { (i, j) };
            [[0, 1, 2], [1, 3, 4], [2, 4, 5]][a][b]
        };
        let mut out = StateField::zeros(grid);
        for idx in 0..grid.len() {
            if !self.keep[idx] {
                continue;
            }
            let xi = grid.wavevector(idx);
            for i in 0..3 {
                let (mut nu, mut nw, mut nb) = (ZERO, ZERO, ZERO);
                for j in 0..3 {
                    let ix = Complex64::new(0.0, xi[j]);
                    nu -= ix * hat[sym_slot(j, i)][idx];
                    nw -= ix * hat[6 + 3 * j + i][idx];
                    let anti = match (j, i) {
                        (0, 1) => hat[15][idx],
                        (0, 2) => hat[16][idx],
                        (1, 2) => hat[17][idx],
                        (1, 0) => -hat[15][idx],
                        (2, 0) => -hat[16][idx],
                        (2, 1) => -hat[17][idx],
                        _ => ZERO,
                    };
                    nb += ix * anti;
                }
                out.u.comps[i][idx] = nu;
                out.w.comps[i][idx] = nw;
                out.b.comps[i][idx] = nb;
            }
        }
        out.u = leray_project(&grid, &out.u);
        out.b = leray_project(&grid, &out.b);
        Ok((out, speed(u)))
    }

    /// One step of size `h`, or `None` if the Courant limit is exceeded at
    /// the start of the step.
    pub fn try_step(&self, z: &StateField, h: f64) -> Result<Option<StateField>> {
        self.check_input(z)?;
        self.advance(z, h)
    }

    fn weights(&self, h: f64) -> Arc<StepWeights> {
        let mut cache = self.weights.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(w) = cache.iter().find(|w| w.h == h) {
            return w.clone();
        }
        let sym = &self.symbols;
        let tables = match self.cfg.scheme {
            Scheme::EtdRk2 => vec![
                sym.tabulate(|l| (h * l).exp()),
                sym.tabulate(|l| h * phi1(h * l)),
                sym.tabulate(|l| h * phi2(h * l)),
            ],
            Scheme::IfRk4 => vec![
                sym.tabulate(|l| (h * l).exp()),
                sym.tabulate(|l| (0.5 * h * l).exp()),
                sym.tabulate(|l| 0.5 * h * (0.5 * h * l).exp()),
                sym.tabulate(|_| 0.5 * h),
                sym.tabulate(|l| h * (0.5 * h * l).exp()),
                sym.tabulate(|l| h / 6.0 * (h * l).exp()),
                sym.tabulate(|l| h / 3.0 * (0.5 * h * l).exp()),
                sym.tabulate(|_| h / 6.0),
            ],
        };
        let w = Arc::new(StepWeights { h, tables });
        cache.push(w.clone());
        w
    }

    /// Step without the input audit; intermediate stages are solenoidal by
    /// construction.
    fn advance(&self, z: &StateField, h: f64) -> Result<Option<StateField>> {
        let (n0, speed) = self.rhs_with_speed(z)?;
        if self.cfl_number(h, speed) > CFL_LIMIT {
            return Ok(None);
        }
        let sym = &self.symbols;
        let w = self.weights(h);
        let t = &w.tables;
        let next = match self.cfg.scheme {
            Scheme::EtdRk2 => {
                let a = sym.combine_tabulated(&[(z, &t[0]), (&n0, &t[1])])?;
                let n1 = self.rhs_with_speed(&a)?.0;
                let d = n1.sub(&n0);
                a.add(&sym.combine_tabulated(&[(&d, &t[2])])?)
            }
            Scheme::IfRk4 => {
                let k1 = n0;
                let a = sym.combine_tabulated(&[(z, &t[1]), (&k1, &t[2])])?;
                let k2 = self.rhs_with_speed(&a)?.0;
                let b = sym.combine_tabulated(&[(z, &t[1]), (&k2, &t[3])])?;
                let k3 = self.rhs_with_speed(&b)?.0;
                let c = sym.combine_tabulated(&[(z, &t[0]), (&k3, &t[4])])?;
                let k4 = self.rhs_with_speed(&c)?.0;
                let mid = k2.add(&k3);
                sym.combine_tabulated(&[(z, &t[0]), (&k1, &t[5]), (&mid, &t[6]), (&k4, &t[7])])?
            }
        };
        Ok(Some(next))
    }

    /// One step; errors if the Courant limit is exceeded.
    pub fn step(&self, z: &StateField, h: f64) -> Result<StateField> {
        self.try_step(z, h)?.ok_or_else(|| {
            Error::Numerical(format!("step of {h} exceeds the Courant limit {CFL_LIMIT}"))
        })
    }

    /// `e^{tM} z` on this grid.
    pub fn evolve_linear(&self, z: &StateField, t: f64) -> Result<StateField> {
        self.symbols.evolve(z, t)
    }
}

fn speed(u: &[Vec<f64>; 3]) -> f64 {
    (0..u[0].len())
        .map(|x| (u[0][x] * u[0][x] + u[1][x] * u[1][x] + u[2][x] * u[2][x]).sqrt())
        .fold(0.0, f64::max)
}

/// Largest ratio `V|NL̂(ξ)| / (|ξ| · B)` over modes and blocks, with
/// `B = ‖u‖²+‖b‖²` for the u-equation, `‖u‖‖w‖` for w and `2‖u‖‖b‖` for b.
/// The tensor estimate asserts the ratio is at most one.
pub fn tensor_bound_ratio(z: &StateField, nl: &StateField) -> f64 {
    let grid = z.grid;
    let norm = |v: &VectorField| crate::field::l2_norm_sq(&grid, v).sqrt();
    let (nu, nw, nb) = (norm(&z.u), norm(&z.w), norm(&z.b));
    let bounds = [nu * nu + nb * nb, nu * nw, 2.0 * nu * nb];
    let vol = grid.volume();
    let mut worst: f64 = 0.0;
    for idx in 0..grid.len() {
        let k = grid.wavevector_norm_sq(idx).sqrt();
        for (v, bound) in nl.blocks().into_iter().zip(bounds) {
            let c = v.at(idx);
            let mag = vol * (c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr()).sqrt();
            if mag == 0.0 {
                continue;
            }
            let denom = k * bound;
            worst = worst.max(if denom > 0.0 { mag / denom } else { f64::INFINITY });
        }
    }
    worst
}

/// Difference norms against the paired linear evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffNorms {
    pub l2_z: f64,
    pub l2_w: f64,
    pub h1_z: f64,
}

/// Squared norms recorded at one output time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormRow {
    pub t: f64,
    pub l2_z: f64,
    pub l2_u: f64,
    pub l2_w: f64,
    pub l2_b: f64,
    pub h1_z: f64,
    pub h1_w: f64,
    pub h2_z: f64,
    pub ball: f64,
    pub diff: Option<DiffNorms>,
}

impl NormRow {
    pub fn measure(z: &StateField, t: f64, split_a: f64, linear: Option<&StateField>) -> Result<Self> {
        let g = &z.grid;
        let l2 = |v: &VectorField| crate::field::l2_norm_sq(g, v);
        let diff = linear.map(|zl| {
            let d = z.sub(zl);
            DiffNorms {
                l2_z: d.l2_norm_sq(),
                l2_w: l2(&d.w),
                h1_z: d.gradient_norm_sq(),
            }
        });
        Ok(Self {
            t,
            l2_z: z.l2_norm_sq(),
            l2_u: l2(&z.u),
            l2_w: l2(&z.w),
            l2_b: l2(&z.b),
            h1_z: z.gradient_norm_sq(),
            h1_w: crate::field::gradient_norm_sq(g, &z.w),
            h2_z: z.hessian_norm_sq(),
            ball: fourier_split_integral(z, t, split_a)?.value,
            diff,
        })
    }

    fn is_finite(&self) -> bool {
        let base = [self.l2_z, self.h1_z, self.h2_z, self.ball];
        base.iter().all(|x| x.is_finite())
            && self.diff.is_none_or(|d| d.l2_z.is_finite() && d.h1_z.is_finite())
    }
}

/// Run-level audit values gathered at every output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct RunDiagnostics {
    pub max_divergence_defect: f64,
    pub max_tensor_ratio: f64,
    pub max_conjugate_asymmetry: f64,
    pub stability_proxy: f64,
    pub final_dt: f64,
    pub halvings: u32,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rows: Vec<NormRow>,
    pub snapshots: Vec<(f64, StateField)>,
    pub diagnostics: RunDiagnostics,
    pub final_state: StateField,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }
}

/// Advance `z0` to `t_end`, recording norms every `output_every` base steps.
///
/// `observer` sees every recorded row and state as it is produced, so a
/// caller can persist partial results before a failure.
pub fn simulate(
    cfg: &SolverConfig,
    z0: &StateField,
    mut observer: Option<&mut dyn FnMut(&NormRow, &StateField) -> Result<()>>,
) -> Result<Trajectory> {
    let solver = Solver::new(cfg.clone())?;
    if z0.grid != cfg.grid {
        return Err(Error::Contract("initial data grid differs from configured grid".into()));
    }
    let mut diag = RunDiagnostics {
        stability_proxy: solver.stability_proxy(cfg.dt),
        final_dt: cfg.dt,
        ..Default::default()
    };
    let mut rows = Vec::new();
    let mut snapshots = Vec::new();
    let mut record = |z: &StateField, t: f64, diag: &mut RunDiagnostics| -> Result<()> {
        let linear = if cfg.paired_linear {
            Some(solver.evolve_linear(z0, t)?)
        } else {
            None
        };
        let row = NormRow::measure(z, t, cfg.split_a, linear.as_ref())?;
        if !row.is_finite() {
            return Err(Error::Blowup {
                time: t,
                detail: "non-finite norm".into(),
            });
        }
        let (du, db) = z.divergence_defect();
        diag.max_divergence_defect = diag.max_divergence_defect.max(du).max(db);
        diag.max_conjugate_asymmetry = diag.max_conjugate_asymmetry.max(z.conjugate_asymmetry());
        let nl = solver.rhs_with_speed(z)?.0;
        diag.max_tensor_ratio = diag.max_tensor_ratio.max(tensor_bound_ratio(z, &nl));
        if let Some(obs) = observer.as_mut() {
            obs(&row, z)?;
        }
        if cfg.save_snapshots {
            snapshots.push((t, z.clone()));
        }
        rows.push(row);
        Ok(())
    };

    let mut z = z0.clone();
    solver.check_input(&z)?;
    record(&z, 0.0, &mut diag)?;
    let mut level: u32 = 0;
    let total = cfg.total_steps();
    for step in 0..total {
        let t_next = (step + 1) as f64 * cfg.dt;
        let next = loop {
            let sub = 1usize << level;
            let h = cfg.dt / sub as f64;
            let mut trial = z.clone();
            let mut ok = true;
            for _ in 0..sub {
                match solver.advance(&trial, h)? {
                    Some(s) => trial = s,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                break trial;
            }
            level += 1;
            if level > 30 {
                return Err(Error::Blowup {
                    time: t_next - cfg.dt,
                    detail: "Courant limit unattainable".into(),
                });
            }
            diag.halvings = level;
            diag.final_dt = h / 2.0;
        };
        if !next.l2_norm_sq().is_finite() {
            return Err(Error::Blowup {
                time: t_next,
                detail: "non-finite state".into(),
            });
        }
        z = next;
        if (step + 1) % cfg.output_every == 0 {
            record(&z, t_next, &mut diag)?;
        }
    }
    Ok(Trajectory {
        rows,
        snapshots,
        diagnostics: diag,
        final_state: z,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `‖z(t)‖²` never increases between outputs.
    pub monotone: bool,
    pub max_increase: f64,
    /// Largest `c` with `ΔE/Δt ≤ −c · avg‖∇z‖²` on every interval.
    pub c_empirical: Option<f64>,
    pub passed: bool,
}

/// Discrete audit of `d/dt ‖z‖² ≤ −c ‖∇z‖²` along a trajectory.
pub fn energy_balance_check(rows: &[NormRow]) -> EnergyReport {
    let mut monotone = true;
    let mut max_increase: f64 = 0.0;
    let mut c: Option<f64> = None;
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let de = b.l2_z - a.l2_z;
        if de > 0.0 {
            monotone = false;
            max_increase = max_increase.max(de);
        }
        let avg = 0.5 * (a.h1_z + b.h1_z);
        let dt = b.t - a.t;
        if avg > 0.0 && dt > 0.0 {
            let ck = -de / dt / avg;
            c = Some(c.map_or(ck, |m| m.min(ck)));
        }
    }
    EnergyReport {
        monotone,
        max_increase,
        c_empirical: c,
        passed: monotone && c.is_none_or(|c| c > 0.0),
    }
}
