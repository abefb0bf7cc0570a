use std::f64::consts::TAU;

use mvtorus::calculus::{Control, EikonalFamily, MomentFamily};
use mvtorus::dynamics::{initial_positions, law_invariance_probe, payoff, simulate_flow, ControlSignal, SimulationConfig};
use mvtorus::torus::{fourier_coefficient, wrap, wrap_centered, GridDensity, ParticleCloud, TorusMeasure};
use mvtorus::value::PeriodicLookup;

fn constant(a: &[f64], start: f64, end: f64) -> ControlSignal<f64> {
    ControlSignal::constant(Control::Constant(a.to_vec()), start, end).unwrap()
}

fn drifting(dim: usize, sigma: f64) -> MomentFamily<f64> {
    let mut sig = vec![0.0; dim * dim];
    for i in 0..dim {
        sig[i * dim + i] = sigma;
    }
    MomentFamily { control_gain: 1.0, sigma: sig, ..MomentFamily::zero(dim) }
}

#[test]
fn frozen_dynamics_keep_the_initial_law() {
    for dim in 1..=3 {
        let coords: Vec<f64> = (0..4 * dim).map(|i| wrap(0.7 * i as f64 + 0.1)).collect();
        let mu: TorusMeasure<f64> = ParticleCloud::new(dim, coords, vec![0.25, 0.25, 0.125, 0.375]).unwrap().into();
        let cfg = SimulationConfig::new(64, 0.1, 0.0, 1.0, 3).unwrap();
        let traj = simulate_flow(&mu, &constant(&vec![0.4; dim], 0.0, 1.0), &MomentFamily::zero(dim), &cfg).unwrap();
        let start = traj.positions(0).to_vec();
        assert_eq!(start, initial_positions(&mu, 64, 3).unwrap());
        for j in 0..=traj.steps() {
            assert_eq!(traj.positions(j), start.as_slice());
        }
    }
}

#[test]
fn pure_transport_moves_a_point_mass() {
    for dim in 1..=3 {
        let a: Vec<f64> = (0..dim).map(|i| 0.9 - 0.4 * i as f64).collect();
        let mu = TorusMeasure::dirac(&vec![0.0; dim]).unwrap();
        let cfg = SimulationConfig::new(16, 0.125, 0.0, 2.0, 1).unwrap();
        let traj = simulate_flow(&mu, &constant(&a, 0.0, 2.0), &drifting(dim, 0.0), &cfg).unwrap();
        for j in 0..=traj.steps() {
            let u = traj.times()[j];
            for x in traj.positions(j).chunks(dim) {
                for (xa, aa) in x.iter().zip(&a) {
                    let gap = wrap_centered(xa - aa * u).abs();
                    assert!(gap < 1e-12, "dim {dim} step {j}: {gap}");
                }
            }
        }
    }
}

#[test]
fn stored_laws_are_the_particle_positions() {
    let mu: TorusMeasure<f64> = GridDensity::uniform(vec![32]).unwrap().into();
    let cfg = SimulationConfig::new(100, 0.05, 0.0, 0.5, 9).unwrap();
    let traj = simulate_flow(&mu, &constant(&[0.3], 0.0, 0.5), &drifting(1, 1.0), &cfg).unwrap();
    for j in [0, 3, traj.steps()] {
        let law = traj.law(j);
        assert_eq!(law.coords(), traj.positions(j));
        assert!(law.weights().iter().all(|&w| w == 0.01));
    }
}

#[test]
fn simulation_is_deterministic_in_the_seed() {
    let mu = TorusMeasure::dirac(&[1.0, 2.0]).unwrap();
    let cfg = SimulationConfig::new(300, 0.05, 0.0, 1.0, 42).unwrap();
    let run = |c: &SimulationConfig<f64>| simulate_flow(&mu, &constant(&[0.1, 0.2], 0.0, 1.0), &drifting(2, 0.7), c).unwrap();
    assert_eq!(run(&cfg), run(&cfg));
    let other = SimulationConfig { seed: 43, ..cfg.clone() };
    assert_ne!(run(&cfg).positions(20), run(&other).positions(20));
}

#[test]
fn uniform_law_stays_uniform_under_brownian_motion() {
    let mu: TorusMeasure<f64> = GridDensity::uniform(vec![64]).unwrap().into();
    let n = 1000;
    let family = drifting(1, 1.0);
    for seed in 0..50 {
        let cfg = SimulationConfig::new(n, 0.05, 0.0, 1.0, seed).unwrap();
        let traj = simulate_flow(&mu, &constant(&[0.0], 0.0, 1.0), &family, &cfg).unwrap();
        let first = |j: usize| fourier_coefficient(&TorusMeasure::from(traj.law(j)), &[1]).unwrap().norm();
        let bound = 4.0 / (TAU * n as f64).sqrt() + (-0.5f64).exp() * first(0);
        assert!(first(traj.steps()) <= bound, "seed {seed}: {} > {bound}", first(traj.steps()));
    }
}

#[test]
fn heat_kernel_damps_the_first_mode() {
    // From δ_0 with σ = 1, E[cos X_u] = e^{-u/2}; the Euler scheme is exact
    // in law for Brownian increments.
    let mu = TorusMeasure::dirac(&[0.0]).unwrap();
    let n = 40_000;
    let cfg = SimulationConfig::new(n, 0.1, 0.0, 1.0, 5).unwrap();
    let traj = simulate_flow(&mu, &constant(&[0.0], 0.0, 1.0), &drifting(1, 1.0), &cfg).unwrap();
    for j in [2, 5, 10] {
        let u = traj.times()[j];
        let m = traj.positions(j).iter().map(|x| x.cos()).sum::<f64>() / n as f64;
        let sd = ((1.0 - (-u).exp()).powi(2) / 2.0 / n as f64).sqrt().max(1e-4);
        assert!((m - (-u / 2.0).exp()).abs() <= 5.0 * sd, "u={u}: {m}");
    }
}

#[test]
fn payoff_quadrature_examples() {
    let mu = TorusMeasure::dirac(&[0.0]).unwrap();
    let cfg = SimulationConfig::new(10, 0.05, 0.5, 1.0, 0).unwrap();
    let frozen = simulate_flow(&mu, &constant(&[0.0], 0.5, 1.0), &MomentFamily::frozen(1, 1.0), &cfg).unwrap();
    assert!((payoff(&frozen, &MomentFamily::frozen(1, 1.0)).unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(payoff(&frozen, &MomentFamily::zero(1)).unwrap(), 0.0);

    // Noise-free eikonal family under constant control a: the mean moves as
    // a·u and the running cost is ½a² + 1 + cos(a·u).
    let a = 0.8;
    let family = EikonalFamily::new(PeriodicLookup::from_fn(4096, |y: f64| 1.0 + y.cos()).unwrap(), 0.0);
    let cfg = SimulationConfig::new(5, 0.01, 0.0, 1.0, 0).unwrap();
    let traj = simulate_flow(&mu, &constant(&[a], 0.0, 1.0), &family, &cfg).unwrap();
    let hand: f64 = (0..100).map(|j| (0.5 * a * a + 1.0 + (a * j as f64 * 0.01).cos()) * 0.01).sum();
    assert!((payoff(&traj, &family).unwrap() - hand).abs() < 1e-6);
}

#[test]
fn law_invariance_spreads_shrink_like_inverse_root_n() {
    let mu: TorusMeasure<f64> = GridDensity::from_fn(vec![64], |x: &[f64]| 1.0 + 0.5 * x[0].cos()).unwrap().into();
    let family = EikonalFamily::new(PeriodicLookup::from_fn(1024, |y: f64| 1.0 + y.cos()).unwrap(), 1.0);
    let cfg = SimulationConfig::new(250, 0.05, 0.0, 1.0, 11).unwrap();
    let seeds: Vec<u64> = (0..24).collect();
    let r = law_invariance_probe(&mu, &constant(&[0.5], 0.0, 1.0), &family, &cfg, &seeds, &[250, 1000, 4000], 16).unwrap();
    assert!(r.passes(), "{r:?}");
    let point = TorusMeasure::dirac(&[0.3]).unwrap();
    let r = law_invariance_probe(&point, &constant(&[0.5], 0.0, 1.0), &family, &cfg, &seeds[..3], &[50, 100], 16).unwrap();
    assert!(r.rows.iter().all(|row| row.initial_rho_spread == 0.0));
}
