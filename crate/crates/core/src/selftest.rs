//! Fast invariant suite behind `mmp selftest`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::decay_character::{generate_data, DataSpec};
use crate::error::Result;
use crate::fft::Fft3;
use crate::field::{leray_project, physical_l2_norm_sq, transform_roundtrip, PhysParams};
use crate::grid::Grid;
use crate::linear::GridSymbols;
use crate::solver::{energy_balance_check, simulate, SolverConfig, SOLENOIDAL_TOLERANCE};
use crate::symbol::{assemble_symbol, sample_wavevectors, verify_eigenvalue_bound};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn below(name: &str, value: f64, threshold: f64) -> Check {
    Check {
        name: name.into(),
        value,
        threshold,
        pass: value <= threshold,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn run_selftest(params: &PhysParams) -> Result<SelftestReport> {
    let grid = Grid::new(8, 2.0 * PI)?;
    let fft = Fft3::new(grid);
    let z = generate_data(grid, &DataSpec::new(0.0, 11, 0.05))?;
    let mut checks = Vec::new();

    let back = transform_roundtrip(&fft, &z)?;
    checks.push(below("fft_roundtrip", back.sub(&z).l2_norm_sq().sqrt() / z.l2_norm_sq().sqrt(), 1e-13));
    checks.push(below(
        "parseval",
        rel(physical_l2_norm_sq(&fft, &z.u)?, crate::field::l2_norm_sq(&grid, &z.u)),
        1e-12,
    ));
    let p = leray_project(&grid, &z.w);
    let pp = leray_project(&grid, &p);
    checks.push(below(
        "leray_idempotent",
        crate::field::l2_norm_sq(&grid, &p.sub(&pp)).sqrt(),
        1e-14,
    ));
    let (du, db) = z.divergence_defect();
    checks.push(below("initial_divergence", du.max(db), SOLENOIDAL_TOLERANCE));

    let sym = GridSymbols::new(grid, params)?;
    let direct = sym.evolve(&z, 0.7)?;
    let composed = sym.evolve(&sym.evolve(&z, 0.3)?, 0.4)?;
    checks.push(below(
        "semigroup_composition",
        (direct.sub(&composed).l2_norm_sq() / direct.l2_norm_sq()).sqrt(),
        1e-12,
    ));
    checks.push(below("linear_contraction", direct.l2_norm_sq() / z.l2_norm_sq() - 1.0, 0.0));

    let samples = sample_wavevectors(200, 1e-2, 1e2, 5);
    let bound = verify_eigenvalue_bound(params, &samples)?;
    checks.push(Check {
        name: "dissipation_constant_positive".into(),
        value: bound.lemma_constant,
        threshold: 0.0,
        pass: bound.lemma_constant > 0.0,
    });
    let hermitian = samples
        .iter()
        .map(|&xi| assemble_symbol(xi, params).hermitian_defect())
        .fold(0.0, f64::max);
    checks.push(below("symbol_hermitian", hermitian, 1e-14));

    let mut cfg = SolverConfig::new(grid, *params, 0.05, 0.5);
    cfg.output_every = 2;
    let traj = simulate(&cfg, &z, None)?;
    let energy = energy_balance_check(&traj.rows);
    checks.push(below("energy_increase", energy.max_increase, 0.0));
    checks.push(below(
        "run_divergence",
        traj.diagnostics.max_divergence_defect,
        SOLENOIDAL_TOLERANCE,
    ));
    checks.push(below("run_conjugate_asymmetry", traj.diagnostics.max_conjugate_asymmetry, 1e-12));

    let passed = checks.iter().all(|c| c.pass);
    Ok(SelftestReport { checks, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        let report = run_selftest(&PhysParams::new(1.0, 1.0, 0.5, 1.0).unwrap()).unwrap();
        for c in &report.checks {
            assert!(c.pass, "{c:?}");
        }
    }
}
