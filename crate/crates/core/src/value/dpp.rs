use crate::calculus::{CoefficientFamily, ControlDictionary};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::torus::TorusMeasure;

use super::search::{value_search, Continuation, SearchConfig};

/// Both sides of the dynamic programming identity
/// `v(t,μ) = inf_α ∫_t^τ E[ℓ] du + v(τ, L_τ)`, each estimated by
/// [`value_search`].
#[derive(Clone, Debug, PartialEq)]
pub struct DppReport<S> {
    pub family: String,
    pub t: S,
    pub tau: S,
    /// Search over `[t, T]` with the terminal cost.
    pub lhs: S,
    pub lhs_std_error: S,
    /// Search over `[t, τ]` with the continuation value at `τ`.
    pub rhs: S,
    pub rhs_std_error: S,
    /// `lhs − rhs`.
    pub residual: S,
    /// `3·sqrt(se_lhs² + se_rhs²) + tolerance`.
    pub allowed: S,
    pub pass: bool,
}

/// Evaluates the residual on `[t, τ] ⊂ [t, T]` where `cfg.sim` spans
/// `[t, T]`. `continuation` values the law at `τ`; when `τ = T` it should be
/// [`Continuation::Terminal`], in which case both sides are the same search.
/// `tolerance` absorbs deterministic bias of the continuation (for example
/// the discretization error of a tabulated value function).
pub fn dpp_residual<S: Real, F: CoefficientFamily<S> + Sync + ?Sized>(
    mu0: &TorusMeasure<S>,
    family: &F,
    dict: &ControlDictionary<S>,
    cfg: &SearchConfig<S>,
    tau: S,
    continuation: &Continuation<'_, S>,
    tolerance: S,
) -> Result<DppReport<S>> {
    let (t, end) = (cfg.sim.start, cfg.sim.end);
    if !(tau > t && tau <= end) {
        return Err(Error::InvalidArgument(format!("need t < τ ≤ T, got t={t}, τ={tau}, T={end}")));
    }
    let lhs = value_search(mu0, family, dict, cfg, &Continuation::Terminal)?;
    let short = SearchConfig { sim: cfg.sim.with_horizon(t, tau)?, ..cfg.clone() };
    let rhs = value_search(mu0, family, dict, &short, continuation)?;
    let residual = lhs.value - rhs.value;
    let allowed = lit::<S>(3.0) * (lhs.std_error * lhs.std_error + rhs.std_error * rhs.std_error).sqrt() + tolerance;
    Ok(DppReport {
        family: family.name().to_string(),
        t,
        tau,
        lhs: lhs.value,
        lhs_std_error: lhs.std_error,
        rhs: rhs.value,
        rhs_std_error: rhs.std_error,
        residual,
        allowed,
        pass: residual.abs() <= allowed,
    })
}
