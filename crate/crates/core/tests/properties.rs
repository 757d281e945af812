mod common;

use std::f64::consts::PI;

use common::C;
use mmp_core::analysis::{fit_decay_exponent, RatePrediction, SERIES_DIFF_W, SERIES_DIFF_Z, SERIES_W, SERIES_Z};
use mmp_core::decay_character::{estimate_decay_character, generate_data, DataSpec, SpectralProfile, ANALYTIC_WINDOW};
use mmp_core::fft::Fft3;
use mmp_core::field::{leray_project, l2_norm_sq};
use mmp_core::io::fmt_num;
use mmp_core::linear::GridSymbols;
use mmp_core::symbol::{assemble_symbol, Vec9};
use mmp_core::{Grid, PhysParams};
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = PhysParams> {
    (0.1f64..3.0, 0.1f64..3.0, 0.0f64..2.0, 0.1f64..3.0)
        .prop_map(|(mu, gamma, chi, nu)| PhysParams::new(mu, gamma, chi, nu).unwrap())
}

fn xi_strategy() -> impl Strategy<Value = [f64; 3]> {
    (-2.0f64..2.0, -PI..PI, -1.0f64..1.0).prop_map(|(lr, phi, z)| {
        let rho = 10f64.powf(lr);
        let s = (1.0 - z * z).sqrt();
        [rho * s * phi.cos(), rho * s * phi.sin(), rho * z]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbol_is_hermitian_and_dissipative(p in params_strategy(), xi in xi_strategy()) {
        let m = assemble_symbol(xi, &p);
        prop_assert!(m.hermitian_defect() < 1e-13);
        // Young's inequality on the coupling gives λ_max ≤ −min(μ, γ, ν)|ξ|².
        let k2: f64 = xi.iter().map(|x| x * x).sum();
        let c = p.mu.min(p.gamma).min(p.nu);
        prop_assert!(m.lambda_max() <= -c * k2 * (1.0 - 1e-10));
    }

    #[test]
    fn semigroup_contracts(p in params_strategy(), xi in xi_strategy(), t in 0.0f64..10.0, seed in 0u64..1000) {
        let bundle = assemble_symbol(xi, &p).eigen();
        let v = Vec9::from_fn(|i, _| C::new(((seed + i as u64) % 7) as f64 - 3.0, (i % 3) as f64));
        let out = bundle.semigroup_apply(t, &v).unwrap();
        prop_assert!(out.norm() <= v.norm() * (1.0 + 1e-12));
        let again = bundle.semigroup_apply(0.0, &v).unwrap();
        prop_assert!((again - v).norm() <= 1e-12 * v.norm());
    }

    #[test]
    fn leray_projection_is_orthogonal(seed in 0u64..10_000) {
        let grid = Grid::new(8, 5.0).unwrap();
        let spec = DataSpec { sigma: Some(4.0), ..DataSpec::new(0.0, seed, 1.0) };
        let z = generate_data(grid, &spec).unwrap();
        // w is not projected by the generator
        let p = leray_project(&grid, &z.w);
        let pp = leray_project(&grid, &p);
        prop_assert!(l2_norm_sq(&grid, &p.sub(&pp)) <= 1e-28 * l2_norm_sq(&grid, &z.w));
        prop_assert!(l2_norm_sq(&grid, &p) <= l2_norm_sq(&grid, &z.w) * (1.0 + 1e-14));
        let residual = z.w.sub(&p);
        let cross: f64 = (0..grid.len()).map(|k| (0..3).map(|d| (p.comps[d][k].conj() * residual.comps[d][k]).re).sum::<f64>()).sum();
        prop_assert!(cross.abs() <= 1e-14 * l2_norm_sq(&grid, &z.w) / grid.volume());
    }

    #[test]
    fn real_pair_transforms_round_trip(seed in 0u64..10_000) {
        let grid = Grid::new(8, 1.0).unwrap();
        let fft = Fft3::new(grid);
        let p: Vec<f64> = (0..grid.len()).map(|i| ((i as u64 * 7919 + seed) % 101) as f64 / 50.0 - 1.0).collect();
        let q: Vec<f64> = (0..grid.len()).map(|i| ((i as u64 * 104729 + 3 * seed) % 97) as f64 / 48.0 - 1.0).collect();
        let (a, b) = fft.forward_real_pair(&p, &q).unwrap();
        let (p2, q2) = fft.inverse_real_pair(&a, &b).unwrap();
        for (x, y) in p.iter().zip(&p2).chain(q.iter().zip(&q2)) {
            prop_assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn fit_recovers_power_laws(alpha in -5.0f64..0.5, c in 1e-6f64..1e6, lo in 1.0f64..50.0) {
        let times: Vec<f64> = (0..60).map(|i| lo * 1.1f64.powi(i)).collect();
        let values: Vec<f64> = times.iter().map(|t| c * (1.0 + t).powf(alpha)).collect();
        let fit = fit_decay_exponent(&times, &values, [lo, *times.last().unwrap()]).unwrap();
        prop_assert!((fit.exponent - alpha).abs() < 1e-9);
    }

    #[test]
    fn estimator_recovers_analytic_character(r in -1.2f64..3.0, sigma in 0.5f64..5.0) {
        let est = estimate_decay_character(&SpectralProfile::power_gaussian(r, sigma), ANALYTIC_WINDOW).unwrap();
        prop_assert!((est.r_star.unwrap() - r).abs() < 0.05);
    }

    #[test]
    fn predicted_gaps(r in -1.4f64..4.0) {
        let p = RatePrediction::new(r);
        let gap = p.get(SERIES_W).unwrap() - p.get(SERIES_Z).unwrap();
        prop_assert!((gap + 1.0).abs() < 1e-12);
        let dgap = p.get(SERIES_DIFF_W).unwrap() - p.get(SERIES_DIFF_Z).unwrap();
        prop_assert!((dgap + 1.0).abs() < 1e-12);
        prop_assert!(p.get(SERIES_Z).unwrap() >= -2.5 && p.get(SERIES_DIFF_Z).unwrap() >= -2.5);
    }

    #[test]
    fn number_format_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn grid_evolution_preserves_structure(seed in 0u64..1000, t in 0.0f64..3.0, p in params_strategy()) {
        let grid = Grid::new(8, 2.0 * PI).unwrap();
        let z = generate_data(grid, &DataSpec::new(0.5, seed, 1.0)).unwrap();
        let sym = GridSymbols::new(grid, &p).unwrap();
        let out = sym.evolve(&z, t).unwrap();
        prop_assert!(out.conjugate_asymmetry() < 1e-15);
        let (du, db) = out.divergence_defect();
        prop_assert!(du < 1e-12 && db < 1e-12);
        prop_assert!(out.l2_norm_sq() <= z.l2_norm_sq() * (1.0 + 1e-12));
        let half = sym.evolve(&sym.evolve(&z, t / 2.0).unwrap(), t / 2.0).unwrap();
        prop_assert!(half.sub(&out).l2_norm_sq().sqrt() <= 1e-12 * z.l2_norm_sq().sqrt());
    }
}
