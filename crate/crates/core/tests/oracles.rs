mod common;

use std::f64::consts::PI;

use common::*;
use mmp_core::decay_character::{generate_data, DataSpec, SpectralProfile};
use mmp_core::fft::Fft3;
use mmp_core::linear::{radial_linear_decay, radial_split_integral, RadialConfig, RadialDatum};
use mmp_core::solver::{Solver, SolverConfig};
use mmp_core::symbol::{assemble_symbol, sample_wavevectors, semigroup_apply, Vec9};
use mmp_core::{Grid, PhysParams, StateField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn symbol_matches_entrywise_formula() {
    let p = PhysParams::new(0.7, 1.3, 0.4, 2.0).unwrap();
    for xi in sample_wavevectors(50, 1e-2, 1e2, 3) {
        let d = assemble_symbol(xi, &p).entries - symbol_from_formula(xi, &p);
        assert!(d.iter().all(|x| x.norm() < 1e-12), "{xi:?}");
    }
}

#[test]
fn semigroup_matches_expm_oracle() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for xi in sample_wavevectors(200, 1e-3, 1e1, 9) {
        let t: f64 = rng.random_range(0.0..5.0);
        let v = Vec9::from_fn(|_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m = symbol_from_formula(xi, &p);
        let want = expm(&(m * C::new(t, 0.0))) * v;
        let got = semigroup_apply(&assemble_symbol(xi, &p), t, &v).unwrap();
        worst = worst.max((got - want).norm() / v.norm());
    }
    assert!(worst < 1e-11, "{worst:e}");
}

#[test]
fn fft_matches_direct_dft() {
    let grid = Grid::new(8, 3.0).unwrap();
    let fft = Fft3::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data: Vec<C> = (0..grid.len())
        .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut fast = data.clone();
    fft.forward(&mut fast).unwrap();
    let slow = direct_forward(&grid, &data);
    let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-14, "{err:e}");
    let back = direct_inverse(&grid, &slow);
    let err = back.iter().zip(&data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-13, "{err:e}");
}

fn n8_state(seed: u64, amplitude: f64) -> StateField {
    let grid = Grid::new(8, 2.0 * PI).unwrap();
    let spec = DataSpec {
        sigma: Some(3.0),
        ..DataSpec::new(0.0, seed, amplitude)
    };
    generate_data(grid, &spec).unwrap()
}

#[test]
fn nonlinearity_matches_direct_oracle() {
    for seed in [1, 2] {
        let z = n8_state(seed, 1.0);
        let solver = Solver::new(SolverConfig::new(z.grid, params(), 0.01, 0.01)).unwrap();
        let fast = solver.nonlinear_rhs(&z).unwrap();
        let err = rel_diff(&nonlinear_oracle(&z), &fast);
        assert!(err < 1e-12, "{err:e}");
    }
}

#[test]
fn reduces_to_navier_stokes() {
    let grid = Grid::new(8, 2.0 * PI).unwrap();
    let spec = DataSpec {
        sigma: Some(3.0),
        blocks: [true, false, false],
        ..DataSpec::new(0.0, 5, 0.5)
    };
    let z = generate_data(grid, &spec).unwrap();
    let p = PhysParams::new(0.8, 1.0, 0.0, 1.0).unwrap();
    let h = 0.02;
    let solver = Solver::new(SolverConfig::new(grid, p, h, h)).unwrap();
    let next = solver.step(&z, h).unwrap();
    let want = navier_stokes_step(&z.u, &grid, p.mu, h);
    let zero = || [vec![C::new(0.0, 0.0); grid.len()], vec![C::new(0.0, 0.0); grid.len()], vec![C::new(0.0, 0.0); grid.len()]];
    let err = rel_diff(&[want, zero(), zero()], &next);
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn radial_heat_matches_simpson() {
    let p = params();
    let sigma = 1.0;
    let profile = SpectralProfile::power_gaussian(0.0, sigma);
    let datum = RadialDatum::b_only(profile.clone());
    let cfg = RadialConfig::default();
    let times = [0.0, 0.5, 3.0, 20.0, 150.0];
    let decay = radial_linear_decay(&datum, &p, &times, &cfg).unwrap();
    for (i, &t) in times.iter().enumerate() {
        let f = |rho: f64| profile.radial_density(rho) * (-2.0 * p.nu * rho * rho * t).exp();
        let want = simpson(f, 0.0, 12.0 * sigma, 20_000);
        let got = decay.b.values[i];
        assert!((got / want - 1.0).abs() < 1e-6, "t = {t}: {got} vs {want}");
        let g = |rho: f64| rho * rho * f(rho);
        let want_h1 = simpson(g, 0.0, 12.0 * sigma, 20_000);
        assert!((decay.h1_z.values[i] / want_h1 - 1.0).abs() < 1e-6, "t = {t}");
        let a = 2.5;
        let radius = (a / (1.0 + t)).sqrt();
        let split = radial_split_integral(&datum, &p, t, a, &cfg).unwrap();
        let want_split = simpson(f, 0.0, radius, 20_000);
        assert!((split.value / want_split - 1.0).abs() < 1e-6, "t = {t}: split");
    }
}
