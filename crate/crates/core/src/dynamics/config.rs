use crate::calculus::Control;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Discretization of `[start, end]` for an `N`-particle simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig<S> {
    pub particles: usize,
    pub dt: S,
    pub start: S,
    pub end: S,
    pub seed: u64,
}

impl<S: Real> SimulationConfig<S> {
    pub fn new(particles: usize, dt: S, start: S, end: S, seed: u64) -> Result<Self> {
        let cfg = SimulationConfig { particles, dt, start, end, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `N ≥ 2`, `0 < Δt ≤ T - t`, and `(T - t)/Δt` within `1e-9` of an
    /// integer.
    pub fn validate(&self) -> Result<()> {
        if self.particles < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 particles, got {}", self.particles)));
        }
        if !(self.dt > S::zero()) || !self.dt.is_finite() || !self.start.is_finite() || !self.end.is_finite() {
            return Err(Error::InvalidArgument(format!("time step {} must be positive and finite", self.dt)));
        }
        let span = self.end - self.start;
        if self.dt > span * (S::one() + lit(1e-12)) {
            return Err(Error::InvalidArgument(format!("time step {} exceeds horizon length {span}", self.dt)));
        }
        let ratio = span / self.dt;
        if (ratio - ratio.round()).abs() > lit(1e-9) {
            return Err(Error::InvalidArgument(format!("horizon {span} is not a whole number of steps {}", self.dt)));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.end - self.start) / self.dt).round().to_usize().unwrap_or(0)
    }

    /// `u_j = start + jΔt`, with `u_M = end` exactly.
    pub fn time(&self, j: usize) -> S {
        if j == self.steps() {
            self.end
        } else {
            self.start + S::from_usize(j).expect("step index") * self.dt
        }
    }

    /// Same discretization on `[start, end]`.
    pub fn with_horizon(&self, start: S, end: S) -> Result<Self> {
        Self::new(self.particles, self.dt, start, end, self.seed)
    }
}

/// Piecewise-constant-in-time choice of feedback maps.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSignal<S> {
    breakpoints: Vec<S>,
    controls: Vec<Control<S>>,
}

impl<S: Real> ControlSignal<S> {
    /// `controls[i]` acts on `[breakpoints[i], breakpoints[i+1])`.
    pub fn new(breakpoints: Vec<S>, controls: Vec<Control<S>>) -> Result<Self> {
        if controls.is_empty() || breakpoints.len() != controls.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} breakpoints cannot bound {} control intervals",
                breakpoints.len(),
                controls.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("breakpoints must be strictly increasing".into()));
        }
        let m = controls[0].control_dim();
        if controls.iter().any(|c| c.control_dim() != m) {
            return Err(Error::InvalidArgument("controls of a signal must share one control dimension".into()));
        }
        Ok(ControlSignal { breakpoints, controls })
    }

    pub fn constant(control: Control<S>, start: S, end: S) -> Result<Self> {
        Self::new(vec![start, end], vec![control])
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn controls(&self) -> &[Control<S>] {
        &self.controls
    }

    pub fn start(&self) -> S {
        self.breakpoints[0]
    }

    pub fn end(&self) -> S {
        *self.breakpoints.last().expect("nonempty")
    }

    /// Control in force at time `u`; a breakpoint belongs to the interval
    /// it opens.
    pub fn control_at(&self, u: S) -> &Control<S> {
        let scale = S::one() + self.end().abs().max(self.start().abs());
        let tol = lit::<S>(1e-9) * scale;
        let i = self.breakpoints[1..self.breakpoints.len() - 1].iter().take_while(|&&b| b <= u + tol).count();
        &self.controls[i]
    }

    /// Fails unless the signal spans `[cfg.start, cfg.end]`.
    pub fn check_covers(&self, cfg: &SimulationConfig<S>) -> Result<()> {
        let tol = lit::<S>(1e-9) * (S::one() + cfg.end.abs());
        if (self.start() - cfg.start).abs() > tol || (self.end() - cfg.end).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "signal covers [{}, {}] but the simulation runs on [{}, {}]",
                self.start(),
                self.end(),
                cfg.start,
                cfg.end
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SimulationConfig::new(1, 0.1, 0.0, 1.0, 0).is_err());
        assert!(SimulationConfig::new(10, 0.3, 0.0, 1.0, 0).is_err());
        assert!(SimulationConfig::new(10, 2.0, 0.0, 1.0, 0).is_err());
        let c = SimulationConfig::new(10, 0.1, 0.0, 1.0, 0).unwrap();
        assert_eq!(c.steps(), 10);
        assert_eq!(c.time(10), 1.0);
    }

    #[test]
    fn signal_lookup() {
        let s = ControlSignal::new(
            vec![0.0, 0.5, 1.0],
            vec![Control::Constant(vec![1.0]), Control::Constant(vec![2.0])],
        )
        .unwrap();
        assert_eq!(s.control_at(0.0), &Control::Constant(vec![1.0]));
        assert_eq!(s.control_at(0.5), &Control::Constant(vec![2.0]));
        assert_eq!(s.control_at(0.5 - 1e-12), &Control::Constant(vec![2.0]));
        assert_eq!(s.control_at(1.0), &Control::Constant(vec![2.0]));
        assert!(ControlSignal::new(vec![0.0, 0.0], vec![Control::Constant(vec![1.0])]).is_err());
    }
}
