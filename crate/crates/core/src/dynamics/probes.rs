use crate::calculus::CoefficientFamily;
use crate::error::{Error, Result};
use crate::metrics::{rho_from_tables, SobolevWeight};
use crate::rng::{derive_seed, tag, NormalStreams};
use crate::scalar::{count, lit, Real};
use crate::stats::{log_log_slope, mean, std_dev};
use crate::torus::{fourier_table, sample_measure, table_of_atoms, Atoms, FourierTable, TorusMeasure};

use super::config::{ControlSignal, SimulationConfig};
use super::system::{initial_positions, payoff, simulate_flow, Stepper};

/// Spread of outcomes across independent resamplings at one particle count.
#[derive(Clone, Debug, PartialEq)]
pub struct LawInvarianceRow<S> {
    pub particles: usize,
    pub payoff_mean: S,
    /// Standard deviation of the payoff across seeds.
    pub payoff_spread: S,
    /// Mean pairwise `ρ_{n_*}` between the initial empirical laws.
    pub initial_rho_spread: S,
    /// Mean pairwise `ρ_{n_*}` between the terminal empirical laws.
    pub terminal_rho_spread: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LawInvarianceReport<S> {
    pub rows: Vec<LawInvarianceRow<S>>,
    /// Fitted exponent of payoff spread against `N`.
    pub payoff_exponent: Option<S>,
    /// Fitted exponent of terminal `ρ` spread against `N`.
    pub rho_exponent: Option<S>,
}

impl<S: Real> LawInvarianceReport<S> {
    /// Both fitted exponents lie in `[-0.7, -0.3]`.
    pub fn passes(&self) -> bool {
        let ok = |e: Option<S>| e.is_some_and(|e| e >= lit(-0.7) && e <= lit(-0.3));
        ok(self.payoff_exponent) && ok(self.rho_exponent)
    }
}

fn mean_pairwise_rho<S: Real>(tables: &[FourierTable<S>], weight: SobolevWeight<S>) -> Result<S> {
    let mut acc = Vec::new();
    for i in 0..tables.len() {
        for j in i + 1..tables.len() {
            acc.push(rho_from_tables(&tables[i], &tables[j], weight)?.value);
        }
    }
    Ok(mean(&acc))
}

/// Re-simulates from fresh samples of `μ0` (one per seed) at each particle
/// count and measures how fast the payoff and terminal laws concentrate.
pub fn law_invariance_probe<S: Real, F: CoefficientFamily<S> + ?Sized>(
    mu0: &TorusMeasure<S>,
    signal: &ControlSignal<S>,
    family: &F,
    cfg: &SimulationConfig<S>,
    seeds: &[u64],
    particle_counts: &[usize],
    cutoff: usize,
) -> Result<LawInvarianceReport<S>> {
    if seeds.len() < 2 {
        return Err(Error::InvalidArgument("law invariance needs at least two trials".into()));
    }
    let weight = SobolevWeight::star(family.dim())?;
    let mut rows = Vec::new();
    for &n in particle_counts {
        let (mut payoffs, mut initial, mut terminal) = (Vec::new(), Vec::new(), Vec::new());
        for &seed in seeds {
            let sample: TorusMeasure<S> = sample_measure(mu0, n, derive_seed(seed, tag::INITIAL))?.into();
            let run_cfg = SimulationConfig { particles: n, seed, ..cfg.clone() };
            let traj = simulate_flow(&sample, signal, family, &run_cfg)?;
            payoffs.push(payoff(&traj, family)?);
            initial.push(fourier_table(&sample, cutoff)?);
            terminal.push(table_of_atoms(&traj.atoms(traj.steps()), cutoff)?);
        }
        rows.push(LawInvarianceRow {
            particles: n,
            payoff_mean: mean(&payoffs),
            payoff_spread: std_dev(&payoffs),
            initial_rho_spread: mean_pairwise_rho(&initial, weight)?,
            terminal_rho_spread: mean_pairwise_rho(&terminal, weight)?,
        });
    }
    let ns: Vec<S> = rows.iter().map(|r| count(r.particles)).collect();
    let payoff_spreads: Vec<S> = rows.iter().map(|r| r.payoff_spread).collect();
    let rho_spreads: Vec<S> = rows.iter().map(|r| r.terminal_rho_spread).collect();
    Ok(LawInvarianceReport {
        payoff_exponent: log_log_slope(&ns, &payoff_spreads),
        rho_exponent: log_log_slope(&ns, &rho_spreads),
        rows,
    })
}

/// Ratios `ρ(L_u^μ, L_u^ν)/ρ(μ, ν)` under synchronous coupling.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowLipschitzReport<S> {
    /// Times of the checkpoints.
    pub times: Vec<S>,
    /// `ρ(μ, ν)` for each pair, from the exact initial measures.
    pub initial_rho: Vec<S>,
    /// `[pair][checkpoint]`; empty for skipped pairs.
    pub ratios: Vec<Vec<S>>,
    /// Pairs whose initial distance was within ten truncation errors of zero.
    pub skipped: Vec<usize>,
    /// Largest ratio over pairs and checkpoints up to each checkpoint.
    pub running_c_hat: Vec<S>,
}

impl<S: Real> FlowLipschitzReport<S> {
    /// The fitted constant `ĉ` over the whole horizon.
    pub fn c_hat(&self) -> S {
        self.running_c_hat.last().copied().unwrap_or_else(S::zero)
    }

    /// `ĉ(u)` stays within `tolerance` (relative) of `ĉ(T)` at every checkpoint.
    pub fn stable_across_horizons(&self, tolerance: S) -> bool {
        let c = self.c_hat();
        self.running_c_hat.iter().all(|&v| ((v - c) / c).abs() <= tolerance)
    }
}

/// Simulates each pair `(μ, ν)` with shared initial-sampling and noise
/// seeds and records the metric ratio at the given step indices.
pub fn flow_lipschitz_probe<S: Real, F: CoefficientFamily<S> + ?Sized>(
    pairs: &[(TorusMeasure<S>, TorusMeasure<S>)],
    signal: &ControlSignal<S>,
    family: &F,
    cfg: &SimulationConfig<S>,
    checkpoints: &[usize],
    cutoff: usize,
) -> Result<FlowLipschitzReport<S>> {
    cfg.validate()?;
    signal.check_covers(cfg)?;
    let steps = cfg.steps();
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints.iter().any(|&c| c == 0 || c > steps) {
        return Err(Error::InvalidArgument("checkpoints must be increasing step indices in 1..=steps".into()));
    }
    let weight = SobolevWeight::star(family.dim())?;
    let (n, d, dp) = (cfg.particles, family.dim(), family.noise_dim());
    let mut report = FlowLipschitzReport {
        times: checkpoints.iter().map(|&c| cfg.time(c)).collect(),
        initial_rho: Vec::new(),
        ratios: Vec::new(),
        skipped: Vec::new(),
        running_c_hat: vec![S::zero(); checkpoints.len()],
    };
    for (p, (mu, nu)) in pairs.iter().enumerate() {
        let r0 = rho_from_tables(&fourier_table(mu, cutoff)?, &fourier_table(nu, cutoff)?, weight)?;
        report.initial_rho.push(r0.value);
        if r0.value <= lit::<S>(10.0) * r0.truncation_error {
            report.skipped.push(p);
            report.ratios.push(Vec::new());
            continue;
        }
        let seed = derive_seed(cfg.seed, p as u64);
        let mut x = initial_positions(mu, n, seed)?;
        let mut y = initial_positions(nu, n, seed)?;
        let mut streams = NormalStreams::new(derive_seed(seed, tag::NOISE), n, dp);
        let mut noise = vec![S::zero(); n * dp];
        let (mut sx, mut sy) = (Stepper::new(family), Stepper::new(family));
        let mut ratios = Vec::with_capacity(checkpoints.len());
        let mut next = 0;
        for j in 0..steps {
            let u = cfg.time(j);
            let dt = cfg.time(j + 1) - u;
            if family.dynamics_depend_on_law() {
                sx.refresh_features(&x);
                sy.refresh_features(&y);
            }
            streams.fill(&mut noise);
            let control = signal.control_at(u);
            sx.advance(&mut x, control, &noise, dt, j)?;
            sy.advance(&mut y, control, &noise, dt, j)?;
            if checkpoints[next] == j + 1 {
                let fx = table_of_atoms(&Atoms::uniform(d, &x), cutoff)?;
                let fy = table_of_atoms(&Atoms::uniform(d, &y), cutoff)?;
                ratios.push(rho_from_tables(&fx, &fy, weight)?.value / r0.value);
                next += 1;
                if next == checkpoints.len() {
                    break;
                }
            }
        }
        report.ratios.push(ratios);
    }
    let mut running = S::zero();
    for c in 0..checkpoints.len() {
        for r in report.ratios.iter().filter(|r| !r.is_empty()) {
            running = running.max(r[c]);
        }
        report.running_c_hat[c] = running;
    }
    Ok(report)
}
