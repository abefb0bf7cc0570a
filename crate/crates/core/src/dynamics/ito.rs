use crate::calculus::generator::{generator_from_jet, PointScratch};
use crate::calculus::{linear_derivative_from_tables, CoefficientFamily, DiffusionConvention, SmoothFunction};
use crate::error::{Error, Result};
use crate::metrics::{rho_from_tables, SobolevWeight};
use crate::scalar::{count, lit, Real};
use crate::torus::{fourier_table, table_of_atoms, Atoms, FourierTable, TorusMeasure};

use super::system::FlowTrajectory;

/// A function `ψ(t, μ)` of time and measure with a time derivative and a
/// linear (measure) derivative that is a smooth function on the torus.
pub trait FlowTestFunction<S: Real> {
    fn value(&self, t: S, mu: &Atoms<'_, S>) -> Result<S>;
    fn time_derivative(&self, t: S, mu: &Atoms<'_, S>) -> Result<S>;
    fn measure_derivative(&self, t: S, mu: &Atoms<'_, S>) -> Result<SmoothFunction<S>>;
}

/// `ψ ≡ c`.
#[derive(Clone, Debug)]
pub struct ConstantTest<S> {
    pub dim: usize,
    pub value: S,
}

impl<S: Real> FlowTestFunction<S> for ConstantTest<S> {
    fn value(&self, _t: S, _mu: &Atoms<'_, S>) -> Result<S> {
        Ok(self.value)
    }

    fn time_derivative(&self, _t: S, _mu: &Atoms<'_, S>) -> Result<S> {
        Ok(S::zero())
    }

    fn measure_derivative(&self, _t: S, _mu: &Atoms<'_, S>) -> Result<SmoothFunction<S>> {
        Ok(SmoothFunction::polynomial(FourierTable::zeros(self.dim, 0)?))
    }
}

/// `ψ(t, μ) = μ(f)` for a real trigonometric polynomial `f`.
#[derive(Clone, Debug)]
pub struct LinearFunctional<S> {
    f: FourierTable<S>,
}

impl<S: Real> LinearFunctional<S> {
    pub fn new(f: FourierTable<S>) -> Self {
        LinearFunctional { f }
    }
}

impl<S: Real> FlowTestFunction<S> for LinearFunctional<S> {
    fn value(&self, _t: S, mu: &Atoms<'_, S>) -> Result<S> {
        if mu.dim() != self.f.dim() {
            return Err(Error::DimensionMismatch { expected: self.f.dim(), found: mu.dim() });
        }
        Ok(mu.integrate(|x| self.f.evaluate(x)))
    }

    fn time_derivative(&self, _t: S, _mu: &Atoms<'_, S>) -> Result<S> {
        Ok(S::zero())
    }

    fn measure_derivative(&self, _t: S, _mu: &Atoms<'_, S>) -> Result<SmoothFunction<S>> {
        Ok(SmoothFunction::polynomial(self.f.clone()))
    }
}

/// `ψ(t, μ) = ½ ρ_λ(μ, ν̄)²` with the metric truncated at `cutoff`.
#[derive(Clone, Debug)]
pub struct HalfSquaredDistance<S> {
    target: FourierTable<S>,
    weight: SobolevWeight<S>,
}

impl<S: Real> HalfSquaredDistance<S> {
    pub fn new(target: &TorusMeasure<S>, weight: SobolevWeight<S>, cutoff: usize) -> Result<Self> {
        weight.require_summable()?;
        Ok(HalfSquaredDistance { target: fourier_table(target, cutoff)?, weight })
    }

    fn table(&self, mu: &Atoms<'_, S>) -> Result<FourierTable<S>> {
        table_of_atoms(mu, self.target.cutoff())
    }
}

impl<S: Real> FlowTestFunction<S> for HalfSquaredDistance<S> {
    fn value(&self, _t: S, mu: &Atoms<'_, S>) -> Result<S> {
        let r = rho_from_tables(&self.table(mu)?, &self.target, self.weight)?.value;
        Ok(lit::<S>(0.5) * r * r)
    }

    fn time_derivative(&self, _t: S, _mu: &Atoms<'_, S>) -> Result<S> {
        Ok(S::zero())
    }

    fn measure_derivative(&self, _t: S, mu: &Atoms<'_, S>) -> Result<SmoothFunction<S>> {
        linear_derivative_from_tables(&self.table(mu)?, &self.target, self.weight)
    }
}

/// Both sides of `ψ(T, L_T) = ψ(t, L_t) + ∫ ∂_tψ + E[M[∂_μψ](X_u)] du`
/// along a simulated trajectory, the integral by the left-endpoint rule on
/// the simulation grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ItoResidual<S> {
    /// `ψ(T, L_T) − ψ(t, L_t)`.
    pub lhs: S,
    /// The time integral.
    pub rhs: S,
    /// `lhs − rhs`, signed.
    pub residual: S,
}

pub fn ito_flow_residual<S: Real, F: CoefficientFamily<S> + ?Sized, P: FlowTestFunction<S> + ?Sized>(
    psi: &P,
    trajectory: &FlowTrajectory<S>,
    family: &F,
    convention: DiffusionConvention,
) -> Result<ItoResidual<S>> {
    if trajectory.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), found: trajectory.dim() });
    }
    let d = family.dim();
    let times = trajectory.times();
    let steps = trajectory.steps();
    let mut scratch = PointScratch::new(family);
    let mut rhs = S::zero();
    for j in 0..steps {
        let (u, dt) = (times[j], times[j + 1] - times[j]);
        let atoms = trajectory.atoms(j);
        let gamma = psi.measure_derivative(u, &atoms)?;
        gamma.certified()?;
        if gamma.table.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: gamma.table.dim() });
        }
        let features = family.features(&atoms);
        let control = trajectory.signal().control_at(u);
        let mut drift_term = S::zero();
        for x in trajectory.positions(j).chunks_exact(d) {
            control.eval_into(x, &mut scratch.a);
            drift_term += generator_from_jet(family, x, &features, &gamma.table.jet(x), &mut scratch, convention);
        }
        rhs += dt * (psi.time_derivative(u, &atoms)? + drift_term / count(trajectory.particles()));
    }
    let lhs = psi.value(times[steps], &trajectory.atoms(steps))? - psi.value(times[0], &trajectory.atoms(0))?;
    Ok(ItoResidual { lhs, rhs, residual: lhs - rhs })
}
