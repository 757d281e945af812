//! `mmp` command line. Exit status: 0 success, 1 failed check or runtime
//! error, 2 usage or configuration error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use mmp_core::analysis::{
    fit_decay_exponent, theorem_report, ReportMode, SERIES_GRAD_Z, SERIES_W, SERIES_Z,
};
use mmp_core::config::RunConfig;
use mmp_core::decay_character::{
    estimate_decay_character, grid_window, shell_profile, SpectralProfile, ANALYTIC_WINDOW,
};
use mmp_core::io::{run_report, run_to_dir, write_table, Table};
use mmp_core::linear::{radial_linear_decay, RadialConfig, RadialDatum};
use mmp_core::selftest::run_selftest;
use mmp_core::symbol::{rayleigh_basis_check, sample_wavevectors, verify_eigenvalue_bound};
use mmp_core::{Error, PhysParams};

#[derive(Parser)]
#[command(name = "mmp", version, about = "Decay-rate laboratory for the magneto-micropolar system")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.5)]
    chi: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<PhysParams, Error> {
        PhysParams::new(self.mu, self.gamma, self.chi, self.nu).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    PowerGaussian,
    PowerCutoff,
    LogOscillating,
}

#[derive(Clone, Copy, ValueEnum)]
enum Blocks {
    All,
    BOnly,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the symbol and compare its top eigenvalue with the explicit bound.
    SymbolCheck {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        rho_min: f64,
        #[arg(long, default_value_t = 1e3)]
        rho_max: f64,
    },
    /// Estimate the decay character of an analytic profile or of configured grid data.
    DecayChar {
        #[arg(long, value_enum, default_value = "power-gaussian")]
        profile: Profile,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        r: f64,
        /// Gaussian width or cutoff radius.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        window: Option<Vec<f64>>,
        /// Estimate from the initial data of this run configuration instead.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Fail unless the estimate is within `tol` of this value.
        #[arg(long, allow_hyphen_values = true)]
        expect: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Linear decay of a radial datum on the continuum.
    LinearDecay {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "power-gaussian")]
        profile: Profile,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, value_enum, default_value = "all")]
        blocks: Blocks,
        #[arg(long, default_value_t = 1e4)]
        t_max: f64,
        #[arg(long, default_value_t = 121)]
        points: usize,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        window: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.1)]
        tolerance: f64,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full nonlinear solver from a TOML configuration.
    Simulate(RunArgs),
    /// Run the nonlinear solver paired with the linear evolution of the same data.
    CompareLinear(RunArgs),
    /// Fit an algebraic decay exponent to a CSV column.
    FitRate {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], required = true)]
        window: Vec<f64>,
    },
    /// Compare a finished run against the predicted rates.
    Report {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        r_star: Option<f64>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        window: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.1)]
        tolerance: f64,
    },
    /// Fast invariant suite.
    Selftest {
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// JSON on stdout and a pass flag.
type Outcome = (serde_json::Value, bool);

pub fn run() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("{}", json!({ "error": e.to_string() }));
        return 2;
    }
    match dispatch(cli.command) {
        Ok((value, pass)) => {
            let text = serde_json::to_string_pretty(&value).unwrap_or_default();
            let _ = writeln!(std::io::stdout(), "{text}");
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.to_string() }));
            match e {
                Error::Config(_) => 2,
                _ => 1,
            }
        }
    }
}

fn init_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("MMP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| Error::Config(format!("MMP_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn window_arg(w: &Option<Vec<f64>>) -> Option<[f64; 2]> {
    w.as_ref().map(|v| [v[0], v[1]])
}

fn profile(kind: Profile, r: f64, scale: f64) -> SpectralProfile {
    match kind {
        Profile::PowerGaussian => SpectralProfile::power_gaussian(r, scale),
        Profile::PowerCutoff => SpectralProfile::power_cutoff(r, scale),
        Profile::LogOscillating => SpectralProfile::log_oscillating(scale),
    }
}

fn dispatch(cmd: Command) -> Result<Outcome, Error> {
    match cmd {
        Command::SymbolCheck {
            params,
            samples,
            seed,
            rho_min,
            rho_max,
        } => {
            let p = params.params()?;
            if !(rho_min > 0.0 && rho_min < rho_max) || samples == 0 {
                return Err(Error::Config("need samples > 0 and 0 < rho_min < rho_max".into()));
            }
            let xs = sample_wavevectors(samples, rho_min, rho_max, seed);
            let report = verify_eigenvalue_bound(&p, &xs)?;
            let rayleigh = rayleigh_basis_check(report.worst_xi, &p)?;
            let pass = report.violations == 0;
            Ok((
                json!({
                    "params": p,
                    "bound_product": p.bound_product(),
                    "bound": report,
                    "rayleigh_at_worst": rayleigh,
                    "passed": pass,
                }),
                pass,
            ))
        }
        Command::DecayChar {
            profile: kind,
            r,
            scale,
            window,
            config,
            expect,
            tol,
        } => {
            let (prof, default_window) = match config {
                Some(path) => {
                    let cfg = RunConfig::load(&path)?;
                    let z = cfg.initial_data()?;
                    (shell_profile(&z, [true; 3]), grid_window(&z.grid))
                }
                None => (profile(kind, r, scale), ANALYTIC_WINDOW),
            };
            let est = estimate_decay_character(&prof, window_arg(&window).unwrap_or(default_window))?;
            let pass = match expect {
                Some(target) => est.r_star.is_some_and(|got| (got - target).abs() <= tol),
                None => true,
            };
            Ok((json!({ "profile": prof.description, "estimate": est, "passed": pass }), pass))
        }
        Command::LinearDecay {
            params,
            profile: kind,
            r,
            scale,
            blocks,
            t_max,
            points,
            window,
            tolerance,
            out,
        } => {
            let p = params.params()?;
            if t_max.is_nan() || t_max <= 1.0 || points < 10 {
                return Err(Error::Config("need t_max > 1 and at least 10 points".into()));
            }
            let prof = profile(kind, r, scale);
            let datum = match blocks {
                Blocks::All => RadialDatum::all_blocks(prof),
                Blocks::BOnly => RadialDatum::b_only(prof),
            };
            let mut times = vec![0.0];
            let (lo, hi) = (1e-2f64.ln(), t_max.ln());
            times.extend((0..points).map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp()));
            let decay = radial_linear_decay(&datum, &p, &times, &RadialConfig::default())?;
            if let Some(path) = &out {
                let rows: Vec<Vec<f64>> = (0..times.len())
                    .map(|i| {
                        vec![
                            times[i],
                            decay.z.values[i],
                            decay.u.values[i],
                            decay.w.values[i],
                            decay.b.values[i],
                            decay.h1_z.values[i],
                        ]
                    })
                    .collect();
                write_table(
                    path,
                    &["t", "l2_z_sq", "l2_u_sq", "l2_w_sq", "l2_b_sq", "h1_z_sq"],
                    &rows,
                )?;
            }
            let window = window_arg(&window).unwrap_or([t_max / 100.0, t_max]);
            let mut series = std::collections::BTreeMap::new();
            series.insert(SERIES_Z.to_string(), decay.z.clone());
            series.insert(SERIES_W.to_string(), decay.w.clone());
            series.insert(SERIES_GRAD_Z.to_string(), decay.h1_z.clone());
            let report = theorem_report(&series, r, window, ReportMode::Radial, tolerance)?;
            let pass = report.passed;
            Ok((
                json!({ "doubling_error": decay.doubling_error, "report": report, "passed": pass }),
                pass,
            ))
        }
        Command::Simulate(args) => simulate_cmd(args, false),
        Command::CompareLinear(args) => simulate_cmd(args, true),
        Command::FitRate { csv, column, window } => {
            let table = Table::read(&csv)?;
            let (t, v) = table.series(&column)?;
            let fit = fit_decay_exponent(&t, &v, [window[0], window[1]])?;
            Ok((json!({ "column": column, "window": window, "fit": fit }), true))
        }
        Command::Report {
            run,
            r_star,
            window,
            tolerance,
        } => {
            let report = run_report(&run, r_star, window_arg(&window), tolerance)?;
            let pass = report.passed;
            Ok((to_json(&report), pass))
        }
        Command::Selftest { params } => {
            let report = run_selftest(&params.params()?)?;
            let pass = report.passed;
            Ok((to_json(&report), pass))
        }
    }
}

fn simulate_cmd(args: RunArgs, paired: bool) -> Result<Outcome, Error> {
    let mut cfg = RunConfig::load(&args.config)?;
    if paired {
        cfg.output.paired_linear = true;
    }
    if let Some(dir) = args.out_dir {
        cfg.output.dir = dir;
    }
    let dir = cfg.output.dir.clone();
    let outcome = run_to_dir(&cfg, &dir)?;
    let pass = outcome.manifest.summary.passed;
    Ok((json!({ "dir": dir, "manifest": outcome.manifest }), pass))
}
