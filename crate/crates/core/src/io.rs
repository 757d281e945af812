//! Run artifacts: norm tables, binary snapshots and the run manifest.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    theorem_report, NormSeries, ReportMode, TheoremReport, SERIES_DIFF_W, SERIES_DIFF_Z, SERIES_GRAD_DIFF,
    SERIES_GRAD_W_D2Z, SERIES_GRAD_Z, SERIES_W, SERIES_Z,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::field::StateField;
use crate::grid::Grid;
use crate::solver::{energy_balance_check, simulate, EnergyReport, NormRow, RunDiagnostics, SOLENOIDAL_TOLERANCE};

pub const NORMS_HEADER: [&str; 11] = [
    "t",
    "l2_z_sq",
    "l2_u_sq",
    "l2_w_sq",
    "l2_b_sq",
    "h1_z_sq",
    "h1_w_sq",
    "h2_z_sq",
    "ball_integral",
    "l2_diff_z_sq",
    "l2_diff_w_sq",
];

pub const COMPARE_HEADER: [&str; 4] = ["t", "l2_diff_z_sq", "l2_diff_w_sq", "h1_diff_z_sq"];

pub const SNAPSHOT_MAGIC: &[u8; 16] = b"MMP-SNAPSHOT-v1\0";

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_line(cells: &[String]) -> String {
    let mut s = cells.join(",");
    s.push('\n');
    s
}

pub fn norms_line(row: &NormRow) -> String {
    let mut cells: Vec<String> = [
        row.t, row.l2_z, row.l2_u, row.l2_w, row.l2_b, row.h1_z, row.h1_w, row.h2_z, row.ball,
    ]
    .iter()
    .map(|&x| fmt_num(x))
    .collect();
    match row.diff {
        Some(d) => cells.extend([fmt_num(d.l2_z), fmt_num(d.l2_w)]),
        None => cells.extend([String::new(), String::new()]),
    }
    csv_line(&cells)
}

pub fn compare_line(row: &NormRow) -> Option<String> {
    let d = row.diff?;
    Some(csv_line(&[row.t, d.l2_z, d.l2_w, d.h1_z].map(fmt_num)))
}

/// Write a header and rows of numbers with the crate's number format.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(csv_line(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>()).as_bytes())?;
    for r in rows {
        out.write_all(csv_line(&r.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>()).as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Columns of a numeric CSV. Empty cells read as `None`.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
        let mut lines = BufReader::new(file).lines();
        let header: Vec<String> = match lines.next() {
            Some(h) => h?.trim().split(',').map(|s| s.trim().to_string()).collect(),
            None => return Err(Error::Config(format!("{} is empty", path.display()))),
        };
        let mut columns = vec![Vec::new(); header.len()];
        for (ln, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.trim().split(',').collect();
            if cells.len() != header.len() {
                return Err(Error::Config(format!(
                    "{} line {}: {} cells, header has {}",
                    path.display(),
                    ln + 2,
                    cells.len(),
                    header.len()
                )));
            }
            for (col, cell) in columns.iter_mut().zip(cells) {
                let cell = cell.trim();
                col.push(if cell.is_empty() {
                    None
                } else {
                    Some(cell.parse::<f64>().map_err(|e| {
                        Error::Config(format!("{} line {}: {cell:?}: {e}", path.display(), ln + 2))
                    })?)
                });
            }
        }
        Ok(Self { header, columns })
    }

    pub fn column(&self, name: &str) -> Result<&[Option<f64>]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::Config(format!("no column {name:?}; have {:?}", self.header)))
    }

    /// `(t, value)` pairs where both cells are present.
    pub fn series(&self, name: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        let t = self.column("t")?;
        let v = self.column(name)?;
        Ok(t.iter().zip(v).filter_map(|(a, b)| Some(((*a)?, (*b)?))).unzip())
    }
}

/// Binary snapshot: magic, `n: u32`, `L: f64`, component count `u32`,
/// time `f64`, then complex64 (two little-endian `f32`) coefficients in
/// component-major order `u_x … b_z`, each over the flat mode index.
pub fn write_snapshot(path: &Path, z: &StateField, t: f64) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&(z.grid.n() as u32).to_le_bytes())?;
    out.write_all(&z.grid.length().to_le_bytes())?;
    out.write_all(&9u32.to_le_bytes())?;
    out.write_all(&t.to_le_bytes())?;
    for v in z.blocks() {
        for comp in &v.comps {
            for c in comp {
                out.write_all(&(c.re as f32).to_le_bytes())?;
                out.write_all(&(c.im as f32).to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Read a snapshot back. Coefficients carry single precision, so the
/// solenoidal flags are set against a correspondingly loose threshold.
pub fn read_snapshot(path: &Path) -> Result<(StateField, f64)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let bad = |m: &str| Error::Snapshot(format!("{}: {m}", path.display()));
    if bytes.len() < 40 || &bytes[..16] != SNAPSHOT_MAGIC {
        return Err(bad("missing magic header"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let n = u32_at(16) as usize;
    let length = f64_at(20);
    let ncomp = u32_at(28) as usize;
    let t = f64_at(32);
    if ncomp != 9 {
        return Err(bad(&format!("expected 9 components, found {ncomp}")));
    }
    let grid = Grid::new(n, length).map_err(|e| bad(&e.to_string()))?;
    let len = grid.len();
    if bytes.len() != 40 + 9 * len * 8 {
        return Err(bad(&format!("expected {} bytes, found {}", 40 + 9 * len * 8, bytes.len())));
    }
    let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
    let mut z = StateField::zeros(grid);
    let mut offset = 40;
    for v in [&mut z.u, &mut z.w, &mut z.b] {
        for comp in v.comps.iter_mut() {
            for c in comp.iter_mut() {
                *c = Complex64::new(f32_at(offset), f32_at(offset + 4));
                offset += 8;
            }
        }
    }
    let (du, db) = z.divergence_defect();
    let loose = SOLENOIDAL_TOLERANCE.max(1e-6);
    z.solenoidal_u = du <= loose;
    z.solenoidal_b = db <= loose;
    Ok((z, t))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub rows: usize,
    pub t_final: f64,
    pub diagnostics: Option<RunDiagnostics>,
    pub energy: Option<EnergyReport>,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub threads: usize,
    pub artifacts: Vec<String>,
    pub summary: RunSummary,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

pub struct RunOutcome {
    pub dir: PathBuf,
    pub rows: Vec<NormRow>,
    pub manifest: RunManifest,
}

/// Run a configured simulation and write its artifacts into `dir`.
///
/// Rows are flushed as they are produced. A manifest is written even when
/// the run fails; the error is then returned after it is on disk.
pub fn run_to_dir(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    let started = unix_now();
    fs::create_dir_all(dir)?;
    let mut solver_cfg = cfg.solver_config()?;
    let snapshots = solver_cfg.save_snapshots;
    solver_cfg.save_snapshots = false;
    let paired = solver_cfg.paired_linear;

    let mut artifacts = vec!["config.toml".to_string(), "norms.csv".to_string()];
    fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    let mut norms = BufWriter::new(File::create(dir.join("norms.csv"))?);
    norms.write_all(csv_line(&NORMS_HEADER.map(String::from)).as_bytes())?;
    let mut compare = if paired {
        artifacts.push("compare.csv".into());
        let mut w = BufWriter::new(File::create(dir.join("compare.csv"))?);
        w.write_all(csv_line(&COMPARE_HEADER.map(String::from)).as_bytes())?;
        Some(w)
    } else {
        None
    };
    if snapshots {
        fs::create_dir_all(dir.join("snapshots"))?;
    }

    let mut rows: Vec<NormRow> = Vec::new();
    let mut snap_names = Vec::new();
    let z0 = cfg.initial_data()?;
    let result = {
        let mut observer = |row: &NormRow, z: &StateField| -> Result<()> {
            norms.write_all(norms_line(row).as_bytes())?;
            norms.flush()?;
            if let (Some(w), Some(line)) = (compare.as_mut(), compare_line(row)) {
                w.write_all(line.as_bytes())?;
                w.flush()?;
            }
            if snapshots {
                let name = format!("snapshots/snap_{:05}.bin", rows.len());
                write_snapshot(&dir.join(&name), z, row.t)?;
                snap_names.push(name);
            }
            rows.push(*row);
            Ok(())
        };
        simulate(&solver_cfg, &z0, Some(&mut observer))
    };
    artifacts.extend(snap_names);
    artifacts.push("manifest.json".into());

    let (diagnostics, energy, error) = match &result {
        Ok(traj) => (Some(traj.diagnostics), Some(energy_balance_check(&traj.rows)), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    let passed = error.is_none()
        && energy.as_ref().is_some_and(|e| e.passed)
        && diagnostics.is_some_and(|d| d.max_divergence_defect <= SOLENOIDAL_TOLERANCE);
    let manifest = RunManifest {
        config_hash: cfg.config_hash()?,
        seed: cfg.init.seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: started,
        finished_unix: unix_now(),
        threads: rayon::current_num_threads(),
        artifacts,
        summary: RunSummary {
            rows: rows.len(),
            t_final: rows.last().map_or(0.0, |r| r.t),
            diagnostics,
            energy,
            passed,
            error,
        },
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Numerical(e.to_string()))?;
    fs::write(dir.join("manifest.json"), json + "\n")?;
    result?;
    Ok(RunOutcome {
        dir: dir.to_path_buf(),
        rows,
        manifest,
    })
}

/// Norm series of a run directory keyed by the names of
/// [`crate::analysis::RatePrediction`].
pub fn run_series(dir: &Path) -> Result<BTreeMap<String, NormSeries>> {
    let norms = Table::read(&dir.join("norms.csv"))?;
    let mut out = BTreeMap::new();
    let mut put = |name: &str, (t, v): (Vec<f64>, Vec<f64>)| {
        if !t.is_empty() {
            out.insert(name.to_string(), NormSeries::new(name, t, v));
        }
    };
    put(SERIES_Z, norms.series("l2_z_sq")?);
    put(SERIES_W, norms.series("l2_w_sq")?);
    put(SERIES_GRAD_Z, norms.series("h1_z_sq")?);
    let (t, hw) = norms.series("h1_w_sq")?;
    let (_, h2) = norms.series("h2_z_sq")?;
    put(SERIES_GRAD_W_D2Z, (t, hw.iter().zip(&h2).map(|(a, b)| a + b).collect()));
    put(SERIES_DIFF_Z, norms.series("l2_diff_z_sq")?);
    put(SERIES_DIFF_W, norms.series("l2_diff_w_sq")?);
    let compare = dir.join("compare.csv");
    if compare.exists() {
        put(SERIES_GRAD_DIFF, Table::read(&compare)?.series("h1_diff_z_sq")?);
    }
    Ok(out)
}

/// Torus-mode report for a finished run.
///
/// The window defaults to the configured fit window, else to the last two
/// decades of `1 + t` covered by the run.
pub fn run_report(
    dir: &Path,
    r_star: Option<f64>,
    window: Option<[f64; 2]>,
    tolerance: f64,
) -> Result<TheoremReport> {
    let cfg = RunConfig::load(&dir.join("config.toml"))?;
    let series = run_series(dir)?;
    let z = series
        .get(SERIES_Z)
        .ok_or_else(|| Error::Config(format!("{} has no rows", dir.display())))?;
    let window = window
        .or(cfg.analysis.fit_window)
        .or_else(|| z.default_window())
        .ok_or_else(|| Error::Fit("run too short for a default window".into()))?;
    theorem_report(
        &series,
        r_star.unwrap_or(cfg.init.r_star),
        window,
        ReportMode::Torus,
        tolerance,
    )
}
