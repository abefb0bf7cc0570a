use mvtorus::calculus::{Control, EikonalFamily};
use mvtorus::dynamics::{payoff, simulate_flow, ControlSignal, SimulationConfig};
use mvtorus::metrics::{rho_lambda, SobolevWeight};
use mvtorus::torus::{ParticleCloud, TorusMeasure};
use mvtorus::value::{eikonal_solve, EikonalProblem, PeriodicLookup};

#[test]
fn single_precision_matches_double_precision() {
    let mu32: TorusMeasure<f32> = ParticleCloud::new(1, vec![0.5, 2.0], vec![0.25, 0.75]).unwrap().into();
    let nu32: TorusMeasure<f32> = TorusMeasure::dirac(&[4.0]).unwrap();
    let mu64: TorusMeasure<f64> = ParticleCloud::new(1, vec![0.5, 2.0], vec![0.25, 0.75]).unwrap().into();
    let nu64: TorusMeasure<f64> = TorusMeasure::dirac(&[4.0]).unwrap();
    let r32 = rho_lambda(&mu32, &nu32, SobolevWeight::star(1).unwrap(), 32).unwrap().value;
    let r64 = rho_lambda(&mu64, &nu64, SobolevWeight::star(1).unwrap(), 32).unwrap().value;
    assert!((r32 as f64 - r64).abs() < 1e-5 * r64);

    let w32 = eikonal_solve(&EikonalProblem::new(PeriodicLookup::from_fn(512, |y: f32| 1.0 + y.cos()).unwrap(), 50, 64).unwrap()).unwrap();
    let w64 = eikonal_solve(&EikonalProblem::new(PeriodicLookup::from_fn(512, |y: f64| 1.0 + y.cos()).unwrap(), 50, 64).unwrap()).unwrap();
    assert!((w32.eval(0.0, 0.0) as f64 - w64.eval(0.0, 0.0)).abs() < 1e-4);

    let family = EikonalFamily::new(PeriodicLookup::from_fn(512, |y: f32| 1.0 + y.cos()).unwrap(), 0.0f32);
    let signal = ControlSignal::constant(Control::Constant(vec![0.5f32]), 0.0, 1.0).unwrap();
    let traj = simulate_flow(&TorusMeasure::dirac(&[0.0f32]).unwrap(), &signal, &family, &SimulationConfig::new(8, 0.1f32, 0.0, 1.0, 1).unwrap()).unwrap();
    let hand: f32 = (0..10).map(|j| (0.125 + 1.0 + (0.05 * j as f32).cos()) * 0.1).sum();
    assert!((payoff(&traj, &family).unwrap() - hand).abs() < 1e-4);
}

#[test]
fn double_precision_aliases_name_the_generic_types() {
    let c: mvtorus::ParticleCloud64 = ParticleCloud::dirac(&[1.0]).unwrap();
    let m: mvtorus::TorusMeasure64 = c.into();
    assert_eq!(m.dim(), 1);
}
