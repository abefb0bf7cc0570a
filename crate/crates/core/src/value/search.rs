use crate::calculus::{CoefficientFamily, Control, ControlDictionary};
use crate::dynamics::system::{initial_positions, Stepper};
use crate::dynamics::{payoff, simulate_flow, ControlSignal, SimulationConfig};
use crate::error::{Error, Result};
use crate::parallel::try_par_map;
use crate::rng::{derive_seed, tag, NoiseBank};
use crate::scalar::Real;
use crate::stats::{mean, std_error};
use crate::torus::{Atoms, TorusMeasure};

/// Settings for [`value_search`]. `sim` fixes the particle count, time step,
/// horizon `[t, T]` and master seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig<S> {
    pub sim: SimulationConfig<S>,
    /// Independent Monte-Carlo replicates, shared by every candidate signal.
    pub reps: usize,
    /// Number of constant-in-time segments per signal.
    pub depth: usize,
    /// Largest number of segment simulations before the search stops early.
    pub node_budget: usize,
}

impl<S: Real> SearchConfig<S> {
    pub fn new(sim: SimulationConfig<S>, reps: usize, depth: usize) -> Result<Self> {
        let cfg = SearchConfig { sim, reps, depth, node_budget: 1 << 20 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.reps < 2 {
            return Err(Error::InvalidArgument("value search needs at least 2 replicates".into()));
        }
        if self.depth == 0 || self.depth > self.sim.steps() {
            return Err(Error::InvalidArgument(format!(
                "depth {} must be between 1 and the step count {}",
                self.depth,
                self.sim.steps()
            )));
        }
        Ok(())
    }

    /// Seed of replicate `r`; a flow simulated with this seed reproduces the
    /// replicate's particles exactly.
    pub fn replicate_seed(&self, r: usize) -> u64 {
        derive_seed(derive_seed(self.sim.seed, tag::REPLICATE), r as u64)
    }

    /// Step indices of the segment boundaries, `round(k·M/depth)`.
    pub fn segment_steps(&self) -> Vec<usize> {
        let m = self.sim.steps();
        (0..=self.depth).map(|k| (k * m + self.depth / 2) / self.depth).collect()
    }
}

/// What is charged at the end of the horizon.
pub enum Continuation<'a, S: Real> {
    /// The family's terminal cost `φ`.
    Terminal,
    /// An arbitrary function of the terminal law, with a lower bound used
    /// for pruning (`None` disables pruning).
    Value { f: &'a (dyn Fn(&Atoms<'_, S>) -> Result<S> + Sync), lower_bound: Option<S> },
}

/// Best signal found, with the replicate payoffs it achieved. The value is
/// an upper bound on the true infimum up to Monte-Carlo error.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult<S> {
    pub value: S,
    pub std_error: S,
    pub per_rep: Vec<S>,
    pub signal: ControlSignal<S>,
    /// Dictionary index of each segment's control.
    pub choice: Vec<usize>,
    /// Segment simulations performed.
    pub nodes: usize,
    /// The node budget ran out before the search finished.
    pub partial: bool,
}

#[derive(Clone)]
struct RepState<S> {
    x: Vec<S>,
    cost: S,
}

struct Search<'a, S: Real, F: CoefficientFamily<S> + ?Sized> {
    family: &'a F,
    dict: &'a ControlDictionary<S>,
    cfg: &'a SearchConfig<S>,
    banks: Vec<NoiseBank<S>>,
    segments: Vec<usize>,
    continuation: &'a Continuation<'a, S>,
    floor_rate: Option<S>,
    floor_end: Option<S>,
    nodes: usize,
    partial: bool,
    best: Option<(S, Vec<S>, Vec<usize>)>,
}

impl<'a, S: Real, F: CoefficientFamily<S> + Sync + ?Sized> Search<'a, S, F> {
    fn advance_segment(&self, states: &[RepState<S>], k: usize, control: &Control<S>) -> Result<Vec<RepState<S>>> {
        let (j0, j1) = (self.segments[k], self.segments[k + 1]);
        let indexed: Vec<(usize, &RepState<S>)> = states.iter().enumerate().collect();
        try_par_map(&indexed, |&(r, state)| {
            let mut stepper = Stepper::new(self.family);
            let mut next = state.clone();
            for j in j0..j1 {
                let dt = self.cfg.sim.time(j + 1) - self.cfg.sim.time(j);
                stepper.refresh_features(&next.x);
                next.cost += dt * stepper.running_cost(&next.x, control);
                stepper.advance(&mut next.x, control, self.banks[r].step(j), dt, j)?;
            }
            Ok(next)
        })
    }

    fn finish(&self, states: &[RepState<S>]) -> Result<Vec<S>> {
        let d = self.family.dim();
        states
            .iter()
            .map(|s| {
                let atoms = Atoms::uniform(d, &s.x);
                let end = match self.continuation {
                    Continuation::Terminal => self.family.terminal_cost(&atoms),
                    Continuation::Value { f, .. } => f(&atoms)?,
                };
                Ok(s.cost + end)
            })
            .collect()
    }

    /// Lower bound on the mean payoff of any completion after segment `k`.
    fn bound(&self, partial: S, k: usize) -> Option<S> {
        let remaining = self.cfg.sim.end - self.cfg.sim.time(self.segments[k]);
        Some(partial + self.floor_rate? * remaining + self.floor_end?)
    }

    fn explore(&mut self, states: Vec<RepState<S>>, k: usize, prefix: &mut Vec<usize>) -> Result<()> {
        if k == self.cfg.depth {
            let totals = self.finish(&states)?;
            let m = mean(&totals);
            if self.best.as_ref().is_none_or(|(b, _, _)| m < *b) {
                self.best = Some((m, totals, prefix.clone()));
            }
            return Ok(());
        }
        let mut children = Vec::with_capacity(self.dict.len());
        for (i, control) in self.dict.entries().iter().enumerate() {
            if self.nodes >= self.cfg.node_budget {
                self.partial = true;
                break;
            }
            self.nodes += 1;
            let child = self.advance_segment(&states, k, control)?;
            let partial = mean(&child.iter().map(|s| s.cost).collect::<Vec<_>>());
            children.push((partial, i, child));
        }
        drop(states);
        children.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
        for (partial, i, child) in children {
            if let (Some((best, _, _)), Some(lb)) = (&self.best, self.bound(partial, k + 1)) {
                if lb >= *best {
                    continue;
                }
            }
            prefix.push(i);
            self.explore(child, k + 1, prefix)?;
            prefix.pop();
        }
        Ok(())
    }
}

/// Branch-and-bound over all signals with `cfg.depth` segments drawn from
/// `dict`, minimizing the replicate-mean payoff. Every signal sees the same
/// initial particles and Gaussian increments, so enlarging the dictionary
/// can only lower the result.
pub fn value_search<S: Real, F: CoefficientFamily<S> + Sync + ?Sized>(
    mu0: &TorusMeasure<S>,
    family: &F,
    dict: &ControlDictionary<S>,
    cfg: &SearchConfig<S>,
    continuation: &Continuation<'_, S>,
) -> Result<SearchResult<S>> {
    cfg.validate()?;
    if mu0.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), found: mu0.dim() });
    }
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    if dict.entries()[0].control_dim() != family.control_dim() {
        return Err(Error::DimensionMismatch { expected: family.control_dim(), found: dict.entries()[0].control_dim() });
    }
    let (n, steps) = (cfg.sim.particles, cfg.sim.steps());
    let mut states = Vec::with_capacity(cfg.reps);
    let mut banks = Vec::with_capacity(cfg.reps);
    for r in 0..cfg.reps {
        let seed = cfg.replicate_seed(r);
        states.push(RepState { x: initial_positions(mu0, n, seed)?, cost: S::zero() });
        banks.push(NoiseBank::new(derive_seed(seed, tag::NOISE), steps, n, family.noise_dim()));
    }
    let floor_end = match continuation {
        Continuation::Terminal => family.terminal_cost_floor(),
        Continuation::Value { lower_bound, .. } => *lower_bound,
    };
    let mut search = Search {
        family,
        dict,
        cfg,
        banks,
        segments: cfg.segment_steps(),
        continuation,
        floor_rate: family.running_cost_floor(),
        floor_end,
        nodes: 0,
        partial: false,
        best: None,
    };
    search.explore(states, 0, &mut Vec::new())?;
    let (value, per_rep, choice) = search
        .best
        .take()
        .ok_or_else(|| Error::InvalidArgument("node budget too small to complete a single signal".into()))?;
    let breakpoints = search.segments.iter().map(|&j| cfg.sim.time(j)).collect();
    let controls = choice.iter().map(|&i| dict.entries()[i].clone()).collect();
    Ok(SearchResult {
        value,
        std_error: std_error(&per_rep),
        per_rep,
        signal: ControlSignal::new(breakpoints, controls)?,
        choice,
        nodes: search.nodes,
        partial: search.partial,
    })
}

/// Replicate-mean payoff of one fixed signal under the same replicate
/// seeds as [`value_search`].
pub fn evaluate_signal<S: Real, F: CoefficientFamily<S> + Sync + ?Sized>(
    mu0: &TorusMeasure<S>,
    family: &F,
    signal: &ControlSignal<S>,
    cfg: &SearchConfig<S>,
    continuation: &Continuation<'_, S>,
) -> Result<(S, S)> {
    cfg.validate()?;
    signal.check_covers(&cfg.sim)?;
    let reps: Vec<usize> = (0..cfg.reps).collect();
    let totals = try_par_map(&reps, |&r| -> Result<S> {
        let seed = cfg.replicate_seed(r);
        let sim = SimulationConfig { seed, ..cfg.sim.clone() };
        let traj = simulate_flow(mu0, signal, family, &sim)?;
        let total = payoff(&traj, family)?;
        match continuation {
            Continuation::Terminal => Ok(total),
            Continuation::Value { f, .. } => {
                let last = traj.atoms(traj.steps());
                Ok(total - family.terminal_cost(&last) + f(&last)?)
            }
        }
    })?;
    Ok((mean(&totals), std_error(&totals)))
}
