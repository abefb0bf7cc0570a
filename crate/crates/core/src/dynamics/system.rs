use crate::calculus::{CoefficientFamily, Control};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, tag, NormalStreams};
use crate::scalar::{count, Real};
use crate::torus::{sample_measure, wrap, Atoms, ParticleCloud, TorusMeasure};

use super::config::{ControlSignal, SimulationConfig};

/// Per-step work shared by every simulator: law features, running cost and
/// the Euler–Maruyama update.
pub(crate) struct Stepper<'a, S, F: ?Sized> {
    family: &'a F,
    a: Vec<S>,
    b: Vec<S>,
    sigma: Vec<S>,
    features: Vec<S>,
}

impl<'a, S: Real, F: CoefficientFamily<S> + ?Sized> Stepper<'a, S, F> {
    pub fn new(family: &'a F) -> Self {
        Stepper {
            family,
            a: vec![S::zero(); family.control_dim()],
            b: vec![S::zero(); family.dim()],
            sigma: vec![S::zero(); family.dim() * family.noise_dim()],
            features: Vec::new(),
        }
    }

    /// Features of the empirical law of `positions`.
    pub fn refresh_features(&mut self, positions: &[S]) {
        self.features = self.family.features(&Atoms::uniform(self.family.dim(), positions));
    }

    /// `(1/N) Σ_i ℓ(X_i, μ̂, α(X_i))` using the current features.
    pub fn running_cost(&mut self, positions: &[S], control: &Control<S>) -> S {
        let d = self.family.dim();
        let mut total = S::zero();
        for x in positions.chunks_exact(d) {
            control.eval_into(x, &mut self.a);
            total += self.family.running_cost(x, &self.features, &self.a);
        }
        total / count(positions.len() / d)
    }

    /// `X ← wrap(X + bΔt + σ√Δt·Z)` for every particle; `noise` holds the
    /// `Z` vectors particle-major. Features must be current when the
    /// dynamics depend on the law.
    pub fn advance(&mut self, positions: &mut [S], control: &Control<S>, noise: &[S], dt: S, step: usize) -> Result<()> {
        let d = self.family.dim();
        let dp = self.family.noise_dim();
        let sqrt_dt = dt.sqrt();
        let features: &[S] = if self.family.dynamics_depend_on_law() { &self.features } else { &[] };
        for (i, x) in positions.chunks_exact_mut(d).enumerate() {
            control.eval_into(x, &mut self.a);
            self.family.drift(x, features, &self.a, &mut self.b);
            self.family.volatility(x, features, &self.a, &mut self.sigma);
            let z = &noise[i * dp..(i + 1) * dp];
            for r in 0..d {
                let mut dx = self.b[r] * dt;
                for l in 0..dp {
                    dx += self.sigma[r * dp + l] * sqrt_dt * z[l];
                }
                let next = x[r] + dx;
                if !next.is_finite() {
                    return Err(Error::Diverged { step });
                }
                x[r] = wrap(next);
            }
        }
        Ok(())
    }
}

/// Starting particles for an `N`-particle simulation of `μ0`: the exact
/// atoms when `μ0` is a cloud whose weights are multiples of `1/N`,
/// otherwise `N` i.i.d. draws seeded by `seed`.
pub fn initial_positions<S: Real>(mu0: &TorusMeasure<S>, particles: usize, seed: u64) -> Result<Vec<S>> {
    if let Some(expanded) = mu0.as_cloud().and_then(|c| c.equal_weight_expansion(particles)) {
        return Ok(expanded);
    }
    Ok(sample_measure(mu0, particles, derive_seed(seed, tag::INITIAL))?.coords().to_vec())
}

fn check_family<S: Real, F: CoefficientFamily<S> + ?Sized>(family: &F, mu0: &TorusMeasure<S>, signal: &ControlSignal<S>) -> Result<()> {
    if mu0.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), found: mu0.dim() });
    }
    if signal.controls()[0].control_dim() != family.control_dim() {
        return Err(Error::DimensionMismatch { expected: family.control_dim(), found: signal.controls()[0].control_dim() });
    }
    Ok(())
}

/// Particle paths and empirical laws on the simulation grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrajectory<S> {
    dim: usize,
    particles: usize,
    times: Vec<S>,
    /// `(M+1) × N × d`, time-major.
    positions: Vec<S>,
    signal: ControlSignal<S>,
}

impl<S: Real> FlowTrajectory<S> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn times(&self) -> &[S] {
        &self.times
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn signal(&self) -> &ControlSignal<S> {
        &self.signal
    }

    /// Particle positions at time index `j` (`N × d`).
    pub fn positions(&self, j: usize) -> &[S] {
        let stride = self.particles * self.dim;
        &self.positions[j * stride..(j + 1) * stride]
    }

    /// Path of particle `i` (`(M+1) × d`).
    pub fn path(&self, i: usize) -> Vec<S> {
        (0..self.times.len()).flat_map(|j| self.positions(j)[i * self.dim..(i + 1) * self.dim].to_vec()).collect()
    }

    pub fn atoms(&self, j: usize) -> Atoms<'_, S> {
        Atoms::uniform(self.dim, self.positions(j))
    }

    /// Empirical law at time index `j`, weights exactly `1/N`.
    pub fn law(&self, j: usize) -> ParticleCloud<S> {
        ParticleCloud::uniform(self.dim, self.positions(j).to_vec()).expect("trajectory holds valid particles")
    }
}

/// Euler–Maruyama simulation of the controlled mean-field SDE started from
/// `μ0`.
pub fn simulate_flow<S: Real, F: CoefficientFamily<S> + ?Sized>(
    mu0: &TorusMeasure<S>,
    signal: &ControlSignal<S>,
    family: &F,
    cfg: &SimulationConfig<S>,
) -> Result<FlowTrajectory<S>> {
    cfg.validate()?;
    signal.check_covers(cfg)?;
    check_family(family, mu0, signal)?;
    let (n, d, steps) = (cfg.particles, family.dim(), cfg.steps());
    let mut x = initial_positions(mu0, n, cfg.seed)?;
    let mut positions = Vec::with_capacity((steps + 1) * n * d);
    positions.extend_from_slice(&x);
    let mut streams = NormalStreams::new(derive_seed(cfg.seed, tag::NOISE), n, family.noise_dim());
    let mut noise = vec![S::zero(); n * family.noise_dim()];
    let mut stepper = Stepper::new(family);
    let mut times = vec![cfg.start];
    for j in 0..steps {
        let u = cfg.time(j);
        let dt = cfg.time(j + 1) - u;
        if family.dynamics_depend_on_law() {
            stepper.refresh_features(&x);
        }
        streams.fill(&mut noise);
        stepper.advance(&mut x, signal.control_at(u), &noise, dt, j)?;
        positions.extend_from_slice(&x);
        times.push(cfg.time(j + 1));
    }
    Ok(FlowTrajectory { dim: d, particles: n, times, positions, signal: signal.clone() })
}

/// `J = Σ_j Δt·(1/N)Σ_i ℓ(X^i_{u_j}, μ̂_{u_j}, α_{u_j}(X^i_{u_j})) + φ(μ̂_T)`
/// (left-endpoint rule).
pub fn payoff<S: Real, F: CoefficientFamily<S> + ?Sized>(trajectory: &FlowTrajectory<S>, family: &F) -> Result<S> {
    if trajectory.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), found: trajectory.dim() });
    }
    let mut stepper = Stepper::new(family);
    let mut total = S::zero();
    for j in 0..trajectory.steps() {
        let (u, next) = (trajectory.times[j], trajectory.times[j + 1]);
        stepper.refresh_features(trajectory.positions(j));
        total += (next - u) * stepper.running_cost(trajectory.positions(j), trajectory.signal.control_at(u));
    }
    Ok(total + family.terminal_cost(&trajectory.atoms(trajectory.steps())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{EikonalFamily, MomentFamily};
    use crate::value::PeriodicLookup;

    fn cfg(n: usize, dt: f64, end: f64) -> SimulationConfig<f64> {
        SimulationConfig::new(n, dt, 0.0, end, 42).unwrap()
    }

    #[test]
    fn frozen_dynamics_keep_the_law() {
        let mu: TorusMeasure<f64> = ParticleCloud::new(1, vec![0.5, 2.0], vec![0.5, 0.5]).unwrap().into();
        let fam = MomentFamily::zero(1);
        let sig = ControlSignal::constant(Control::Constant(vec![0.0]), 0.0, 1.0).unwrap();
        let traj = simulate_flow(&mu, &sig, &fam, &cfg(4, 0.25, 1.0)).unwrap();
        for j in 0..=traj.steps() {
            assert_eq!(traj.positions(j), &[0.5, 0.5, 2.0, 2.0]);
        }
    }

    #[test]
    fn pure_transport_is_exact() {
        let mu = TorusMeasure::dirac(&[0.0]).unwrap();
        let fam = MomentFamily { control_gain: 1.0, ..MomentFamily::zero(1) };
        let sig = ControlSignal::constant(Control::Constant(vec![-1.5]), 0.0, 1.0).unwrap();
        let traj = simulate_flow(&mu, &sig, &fam, &cfg(3, 0.1, 1.0)).unwrap();
        for j in 0..=traj.steps() {
            let expect = wrap(-1.5 * traj.times()[j]);
            assert!(traj.positions(j).iter().all(|&x| (x - expect).abs() < 1e-12));
        }
    }

    #[test]
    fn payoff_of_constant_cost_is_exact() {
        let mu = TorusMeasure::dirac(&[0.0]).unwrap();
        let fam = MomentFamily::frozen(1, 1.0);
        let sig = ControlSignal::constant(Control::Constant(vec![0.0]), 0.0, 0.5).unwrap();
        let traj = simulate_flow(&mu, &sig, &fam, &cfg(2, 0.05, 0.5)).unwrap();
        assert!((payoff(&traj, &fam).unwrap() - 0.5).abs() < 1e-15);
        let zero = MomentFamily::zero(1);
        assert_eq!(payoff(&traj, &zero).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let mu = TorusMeasure::dirac(&[1.0]).unwrap();
        let fam = EikonalFamily::new(PeriodicLookup::constant(1.0), 1.0);
        let sig = ControlSignal::constant(Control::Constant(vec![0.3]), 0.0, 1.0).unwrap();
        let a = simulate_flow(&mu, &sig, &fam, &cfg(50, 0.1, 1.0)).unwrap();
        let b = simulate_flow(&mu, &sig, &fam, &cfg(50, 0.1, 1.0)).unwrap();
        assert_eq!(a, b);
        let law = a.law(5);
        assert_eq!(law.coords(), a.positions(5));
        assert!(law.weights().iter().all(|&w| w == 1.0 / 50.0));
    }

    #[test]
    fn nan_coefficients_abort_with_step() {
        let mu = TorusMeasure::dirac(&[1.0]).unwrap();
        let fam = MomentFamily { control_gain: 1.0, ..MomentFamily::zero(1) };
        let sig = ControlSignal::new(
            vec![0.0, 0.2, 1.0],
            vec![Control::Constant(vec![0.0]), Control::Constant(vec![f64::NAN])],
        )
        .unwrap();
        let err = simulate_flow(&mu, &sig, &fam, &cfg(2, 0.1, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Diverged { step: 2 }));
    }
}
