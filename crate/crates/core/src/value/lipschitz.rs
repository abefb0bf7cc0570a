use crate::calculus::{CoefficientFamily, ControlDictionary};
use crate::dynamics::ControlSignal;
use crate::error::{Error, Result};
use crate::metrics::{rho_lambda, SobolevWeight};
use crate::scalar::{lit, Real};
use crate::stats::log_log_slope;
use crate::torus::TorusMeasure;

use super::search::{evaluate_signal, value_search, Continuation, SearchConfig};

/// Payoff sensitivity to the initial law under each constant dictionary
/// signal.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceLipschitzReport<S> {
    /// `ρ_{n_*}(μ, ν)` per pair.
    pub distances: Vec<S>,
    /// Largest `|J(t,μ,α) − J(t,ν,α)| / ρ_{n_*}(μ,ν)` over signals, per
    /// pair; `None` for skipped pairs.
    pub ratios: Vec<Option<S>>,
    /// Pairs whose distance was within ten truncation errors of zero.
    pub skipped: Vec<usize>,
    /// Empirical `L_1`: the largest ratio.
    pub constant: S,
}

impl<S: Real> SpaceLipschitzReport<S> {
    /// `L_1` is finite and within `tolerance` (relative) of `other`'s.
    pub fn stable_against(&self, other: &SpaceLipschitzReport<S>, tolerance: S) -> bool {
        self.constant.is_finite() && other.constant.is_finite() && ((self.constant - other.constant) / other.constant).abs() <= tolerance
    }
}

/// Replicate-mean payoffs from `μ` and `ν` share seeds, so the initial
/// samples and Gaussian increments are coupled across each pair.
pub fn lipschitz_probe_space<S: Real, F: CoefficientFamily<S> + Sync + ?Sized>(
    family: &F,
    dict: &ControlDictionary<S>,
    cfg: &SearchConfig<S>,
    pairs: &[(TorusMeasure<S>, TorusMeasure<S>)],
    cutoff: usize,
) -> Result<SpaceLipschitzReport<S>> {
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let weight = SobolevWeight::star(family.dim())?;
    let signals = dict
        .entries()
        .iter()
        .map(|c| ControlSignal::constant(c.clone(), cfg.sim.start, cfg.sim.end))
        .collect::<Result<Vec<_>>>()?;
    let mut report = SpaceLipschitzReport { distances: Vec::new(), ratios: Vec::new(), skipped: Vec::new(), constant: S::zero() };
    for (p, (mu, nu)) in pairs.iter().enumerate() {
        let rho = rho_lambda(mu, nu, weight, cutoff)?;
        report.distances.push(rho.value);
        if rho.value <= lit::<S>(10.0) * rho.truncation_error {
            report.skipped.push(p);
            report.ratios.push(None);
            continue;
        }
        let mut worst = S::zero();
        for signal in &signals {
            let (jm, _) = evaluate_signal(mu, family, signal, cfg, &Continuation::Terminal)?;
            let (jn, _) = evaluate_signal(nu, family, signal, cfg, &Continuation::Terminal)?;
            worst = worst.max((jm - jn).abs() / rho.value);
        }
        report.constant = report.constant.max(worst);
        report.ratios.push(Some(worst));
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeLipschitzRow<S> {
    pub gap: S,
    /// `|v(t,μ) − v(t+h,μ)|`.
    pub difference: S,
    /// Three combined standard errors of the two value estimates.
    pub noise_floor: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeLipschitzReport<S> {
    pub value_at_t: S,
    pub rows: Vec<TimeLipschitzRow<S>>,
    /// Log-log slope of difference against gap over rows above the noise
    /// floor; `None` when fewer than two rows qualify.
    pub exponent: Option<S>,
    pub noise_floored: bool,
    pub pass: bool,
}

/// Compares `v(t, μ)` with `v(t+h, μ)` for each gap, both estimated by
/// [`value_search`] with the same settings on the shortened horizon.
/// Passes if the fitted exponent is at least 0.45, or if too few
/// differences rise above the Monte-Carlo noise floor to fit one.
pub fn lipschitz_probe_time<S: Real, F: CoefficientFamily<S> + Sync + ?Sized>(
    mu0: &TorusMeasure<S>,
    family: &F,
    dict: &ControlDictionary<S>,
    cfg: &SearchConfig<S>,
    gaps: &[S],
) -> Result<TimeLipschitzReport<S>> {
    let mut distinct = gaps.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    distinct.dedup();
    if distinct.len() < 4 || distinct[0] <= S::zero() {
        return Err(Error::InvalidArgument("time probe needs at least four distinct positive gaps".into()));
    }
    let (t, end) = (cfg.sim.start, cfg.sim.end);
    let base = value_search(mu0, family, dict, cfg, &Continuation::Terminal)?;
    let mut rows = Vec::new();
    for &h in gaps {
        let shifted = SearchConfig { sim: cfg.sim.with_horizon(t + h, end)?, ..cfg.clone() };
        let later = value_search(mu0, family, dict, &shifted, &Continuation::Terminal)?;
        rows.push(TimeLipschitzRow {
            gap: h,
            difference: (base.value - later.value).abs(),
            noise_floor: lit::<S>(3.0) * (base.std_error * base.std_error + later.std_error * later.std_error).sqrt(),
        });
    }
    let above: Vec<&TimeLipschitzRow<S>> = rows.iter().filter(|r| r.difference > r.noise_floor).collect();
    let exponent = if above.len() >= 2 {
        let hs: Vec<S> = above.iter().map(|r| r.gap).collect();
        let ds: Vec<S> = above.iter().map(|r| r.difference).collect();
        log_log_slope(&hs, &ds)
    } else {
        None
    };
    let noise_floored = above.len() < 2;
    let pass = noise_floored || exponent.is_some_and(|e| e >= lit(0.45));
    Ok(TimeLipschitzReport { value_at_t: base.value, rows, exponent, noise_floored, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::MomentFamily;
    use crate::dynamics::SimulationConfig;
    use crate::torus::{FourierTable, ParticleCloud};

    fn cfg() -> SearchConfig<f64> {
        SearchConfig::new(SimulationConfig::new(20, 0.05, 0.0, 1.0, 2).unwrap(), 2, 1).unwrap()
    }

    #[test]
    fn unit_cost_differences_are_the_gaps() {
        let fam = MomentFamily::frozen(1, 1.0);
        let dict = ControlDictionary::constant_grid(0.0, 0.0, 1);
        let mu = TorusMeasure::dirac(&[0.0]).unwrap();
        let r = lipschitz_probe_time(&mu, &fam, &dict, &cfg(), &[0.4, 0.2, 0.1, 0.05]).unwrap();
        for row in &r.rows {
            assert!((row.difference - row.gap).abs() < 1e-12);
        }
        assert!((r.exponent.unwrap() - 1.0).abs() < 1e-9 && r.pass && !r.noise_floored);
        let zero = lipschitz_probe_time(&mu, &MomentFamily::zero(1), &dict, &cfg(), &[0.4, 0.2, 0.1, 0.05]).unwrap();
        assert!(zero.noise_floored && zero.pass);
    }

    #[test]
    fn frozen_state_cost_ratio_is_closed_form() {
        let cos = FourierTable::cosine(1, &[1], 1.0).unwrap();
        let fam = MomentFamily { state_cost: Some(cos), ..MomentFamily::zero(1) };
        let dict = ControlDictionary::constant_grid(0.0, 0.0, 1);
        let mu: TorusMeasure<f64> = ParticleCloud::new(1, vec![0.2, 1.0], vec![0.5, 0.5]).unwrap().into();
        let nu: TorusMeasure<f64> = ParticleCloud::new(1, vec![2.5, 4.0], vec![0.5, 0.5]).unwrap().into();
        let pairs = vec![(mu.clone(), mu.clone()), (mu.clone(), nu.clone())];
        let r = lipschitz_probe_space(&fam, &dict, &cfg(), &pairs, 64).unwrap();
        assert_eq!(r.skipped, vec![0]);
        let exact = ((0.2f64.cos() + 1.0f64.cos()) / 2.0 - (2.5f64.cos() + 4.0f64.cos()) / 2.0).abs();
        assert!((r.constant - exact / r.distances[1]).abs() < 1e-10);
        assert!(r.stable_against(&r, 0.0));
    }
}
