//! Subcommand definitions and their implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mvtorus::calculus::{hamiltonian, DiffusionConvention, SmoothFunction};
use mvtorus::dynamics::{payoff, simulate_flow, ControlSignal};
use mvtorus::metrics::{rho_lambda, SobolevWeight};
use mvtorus::rng::{derive_seed, stream_rng, tag, uniform};
use mvtorus::torus::{read_measure, write_measure, Atoms, ParticleCloud, TorusMeasure};
use mvtorus::value::{
    dpp_residual, eikonal_solve, lipschitz_probe_space, lipschitz_probe_time, oracle_ladder, reduced_value, value_search, Continuation,
    EikonalProblem, OracleLadder,
};

use crate::acceptance::{self, Suite, DEFAULT_SEED};
use crate::config::{potential_lookup, ExperimentConfig, FamilySpec, TrigPolynomial};
use crate::manifest::{RunDir, RunManifest, MANIFEST_FILE};
use crate::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "mvtorus", version, about = "Measures on the torus, Sobolev metrics and mean-field control experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance `ρ_λ` between two measure files.
    Metric(MetricArgs),
    /// Hamiltonian of a configured family at a measure.
    Hamiltonian(HamiltonianArgs),
    /// Simulate the particle system under one dictionary control.
    Simulate(SimulateArgs),
    /// Solve the one-dimensional eikonal equation on a grid.
    Eikonal(EikonalArgs),
    /// Estimate the value function by searching over control signals.
    Value(ConfigArgs),
    /// Compare both sides of the dynamic programming identity.
    DppCheck(DppArgs),
    /// Regularity of the value function in time or in the initial law.
    Lipschitz(LipschitzArgs),
    /// Run a pinned acceptance suite.
    Acceptance(AcceptanceArgs),
    /// Convert a run directory into whitespace-separated plot data.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Sobolev order; defaults to `n_* = 3 + ⌊d/2⌋`.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub cutoff: usize,
}

#[derive(Debug, Args)]
pub struct HamiltonianArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub measure: PathBuf,
    /// Test function as a trigonometric polynomial, e.g. `sin 1 1; const 2`.
    #[arg(long)]
    pub gamma: String,
    /// Use `½ tr(σσ^T ∇²)` in the generator instead of `tr(σσ^T ∇²)`.
    #[arg(long)]
    pub half: bool,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Run directory; defaults to `<output>/<id>` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Index of the dictionary entry applied on the whole horizon.
    #[arg(long, default_value_t = 0)]
    pub control: usize,
    /// Write the empirical law every this many steps (the last step is
    /// always written).
    #[arg(long, default_value_t = 10)]
    pub save_every: usize,
}

#[derive(Debug, Args)]
pub struct EikonalArgs {
    /// Potential `L(m)` as a trigonometric polynomial, e.g. `const 1; cos 1 1`.
    #[arg(long)]
    pub potential: String,
    /// Nodes of the periodic lookup table for the potential.
    #[arg(long, default_value_t = 4096)]
    pub nodes: usize,
    #[arg(long, default_value_t = 200)]
    pub time_steps: usize,
    #[arg(long, default_value_t = 200)]
    pub space_nodes: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Solve with the refined semi-Lagrangian path oracle instead.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct DppArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    #[arg(long)]
    pub tau: f64,
    /// Allowance for bias of the continuation value on top of three
    /// standard errors.
    #[arg(long, default_value_t = 0.0)]
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LipschitzMode {
    Time,
    Space,
}

#[derive(Debug, Args)]
pub struct LipschitzArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    #[arg(long, value_enum)]
    pub mode: LipschitzMode,
    /// Time gaps for `--mode time`.
    #[arg(long, value_delimiter = ',', default_values_t = [0.4, 0.2, 0.1, 0.05])]
    pub gaps: Vec<f64>,
    /// Number of random initial-law pairs for `--mode space`.
    #[arg(long, default_value_t = 8)]
    pub pairs: usize,
}

#[derive(Debug, Args)]
pub struct AcceptanceArgs {
    /// metrics, calculus, dynamics, value or all.
    pub suite: String,
    #[arg(long, default_value = "runs/acceptance")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub dir: PathBuf,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Metric(a) => metric(&a),
        Command::Hamiltonian(a) => hamiltonian_cmd(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Eikonal(a) => eikonal(&a),
        Command::Value(a) => value(&a),
        Command::DppCheck(a) => dpp_check(&a),
        Command::Lipschitz(a) => lipschitz(&a),
        Command::Acceptance(a) => acceptance_cmd(&a),
        Command::Export(a) => export(&a),
    }
}

/// A locked run directory with its manifest under construction.
struct Run {
    dir: RunDir,
    manifest: RunManifest,
    started: Instant,
}

impl Run {
    fn open(path: &Path, command: &str, config: String) -> CliResult<Self> {
        Ok(Run { dir: RunDir::create(path)?, manifest: RunManifest::new(command, config), started: Instant::now() })
    }

    fn artifact(&mut self, name: &str, contents: &str) -> CliResult<()> {
        self.dir.write(name, contents)?;
        self.manifest.artifacts.push(name.to_string());
        Ok(())
    }

    fn check(&mut self, name: &str, pass: bool) {
        self.manifest.checks.push((name.to_string(), pass));
    }

    /// Writes the manifest; failed checks turn into exit code 1.
    fn finish(mut self) -> CliResult<()> {
        self.manifest.wall_clock_seconds = self.started.elapsed().as_secs_f64();
        self.manifest.write(&self.dir)?;
        let failed: Vec<&str> = self.manifest.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Failed(format!("failed checks: {}", failed.join(", "))))
        }
    }
}

struct Loaded {
    cfg: ExperimentConfig,
    out: PathBuf,
    initial: TorusMeasure<f64>,
}

fn load(args: &ConfigArgs) -> CliResult<Loaded> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let initial = cfg.initial.build(base)?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output.join(&cfg.id));
    Ok(Loaded { cfg, out, initial })
}

fn parse_poly(text: &str) -> CliResult<TrigPolynomial> {
    TrigPolynomial::parse(text).map_err(CliError::Usage)
}

fn metric(a: &MetricArgs) -> CliResult<()> {
    let mu: TorusMeasure<f64> = read_measure(&a.a)?;
    let nu: TorusMeasure<f64> = read_measure(&a.b)?;
    let weight = match a.lambda {
        Some(l) => SobolevWeight::new(l, mu.dim())?,
        None => SobolevWeight::star(mu.dim())?,
    };
    let r = rho_lambda(&mu, &nu, weight, a.cutoff)?;
    println!("value,truncation_error,cutoff");
    println!("{},{},{}", r.value, r.truncation_error, a.cutoff);
    Ok(())
}

fn hamiltonian_cmd(a: &HamiltonianArgs) -> CliResult<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let family = cfg.family.build()?;
    let dict = cfg.dictionary.build(family.dim())?;
    let mu: TorusMeasure<f64> = read_measure(&a.measure)?;
    let gamma = SmoothFunction::polynomial(parse_poly(&a.gamma)?.to_table(family.dim())?);
    let convention = if a.half { DiffusionConvention::Half } else { DiffusionConvention::Bare };
    let h = hamiltonian(&mu, &gamma, &dict, family.as_ref(), convention)?;
    println!("value,argmin,control");
    println!("{},{},{}", h.value, h.argmin, dict.entries()[h.argmin].label());
    Ok(())
}

fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let l = load(&a.common)?;
    let family = l.cfg.family.build()?;
    let dict = l.cfg.dictionary.build(family.dim())?;
    let control = dict
        .entries()
        .get(a.control)
        .ok_or_else(|| CliError::Usage(format!("control index {} out of range (dictionary has {})", a.control, dict.len())))?;
    if a.save_every == 0 {
        return Err(CliError::Usage("--save-every must be positive".into()));
    }
    let sim = l.cfg.simulation()?;
    let signal = ControlSignal::constant(control.clone(), sim.start, sim.end)?;
    let mut run = Run::open(&l.out, "simulate", l.cfg.to_string())?;
    let traj = simulate_flow(&l.initial, &signal, family.as_ref(), &sim)?;
    let j_value = payoff(&traj, family.as_ref())?;
    let mut meta = format!("particles = {}\nsteps = {}\ndt = {}\nseed = {}\ncontrol = {}\nsaved =", sim.particles, traj.steps(), sim.dt, sim.seed, control.label());
    for j in (0..=traj.steps()).filter(|&j| j % a.save_every == 0 || j == traj.steps()) {
        let _ = write!(meta, " {j}");
        run.artifact(&format!("laws_{j}.txt"), &write_measure(&traj.law(j).into()))?;
    }
    meta.push('\n');
    run.artifact("meta.txt", &meta)?;
    run.artifact("payoff.csv", &format!("payoff\n{j_value}\n"))?;
    println!("{j_value}");
    run.finish()
}

fn eikonal(a: &EikonalArgs) -> CliResult<()> {
    let potential = parse_poly(&a.potential)?;
    if potential.dim().is_some_and(|d| d != 1) {
        return Err(CliError::Usage("the eikonal potential must be one-dimensional".into()));
    }
    let problem = EikonalProblem::new(potential_lookup(&potential, a.nodes)?, a.time_steps, a.space_nodes)?;
    let config = format!("potential = {potential}\nnodes = {}\ntime_steps = {}\nspace_nodes = {}\noracle = {}\n", a.nodes, a.time_steps, a.space_nodes, a.oracle);
    let mut run = Run::open(&a.out, "eikonal", config)?;
    let table = if a.oracle {
        let r = oracle_ladder(&problem, &OracleLadder::default())?;
        run.check("oracle_converged", r.converged);
        r.table
    } else {
        eikonal_solve(&problem)?
    };
    let mut csv = String::from("t,y,w\n");
    for (i, t) in table.times().iter().enumerate() {
        for (y, w) in table.ys().iter().zip(table.row(i)) {
            let _ = writeln!(csv, "{t},{y},{w}");
        }
    }
    run.artifact("value_table.csv", &csv)?;
    let mut summary = format!("scheme,cfl,error_estimate,w0\n{},{},", table.scheme(), table.cfl());
    if let Some(e) = table.error_estimate() {
        let _ = write!(summary, "{e}");
    }
    let _ = writeln!(summary, ",{}", table.eval(problem.start, 0.0));
    run.artifact("eikonal_summary.csv", &summary)?;
    println!("w(start,0) = {}", table.eval(problem.start, 0.0));
    run.finish()
}

fn value(a: &ConfigArgs) -> CliResult<()> {
    let l = load(a)?;
    let family = l.cfg.family.build()?;
    let dict = l.cfg.dictionary.build(family.dim())?;
    let mut run = Run::open(&l.out, "value", l.cfg.to_string())?;
    let r = value_search(&l.initial, family.as_ref(), &dict, &l.cfg.search()?, &Continuation::Terminal)?;
    let choice: Vec<String> = r.choice.iter().map(|c| c.to_string()).collect();
    run.artifact(
        "value.csv",
        &format!("value,std_error,nodes,partial,choice\n{},{},{},{},{}\n", r.value, r.std_error, r.nodes, r.partial, choice.join(" ")),
    )?;
    run.check("search_complete", !r.partial);
    println!("{} +- {}", r.value, r.std_error);
    run.finish()
}

fn dpp_check(a: &DppArgs) -> CliResult<()> {
    let l = load(&a.common)?;
    let family = l.cfg.family.build()?;
    let dict = l.cfg.dictionary.build(family.dim())?;
    let search = l.cfg.search()?;
    let (start, end) = (search.sim.start, search.sim.end);
    let remaining = end - a.tau;
    let table = match &l.cfg.family {
        FamilySpec::Eikonal { potential, nodes, .. } if a.tau < end => {
            let p = EikonalProblem::new(potential_lookup(potential, *nodes)?, 200, 200)?.with_horizon(start, end)?;
            Some(eikonal_solve(&p)?)
        }
        _ => None,
    };
    let eikonal_rest = |atoms: &Atoms<'_, f64>| Ok(reduced_value(a.tau, atoms, table.as_ref().expect("table built"))?.value);
    let frozen_cost = match &l.cfg.family {
        FamilySpec::Frozen { cost, .. } => *cost,
        _ => 0.0,
    };
    let frozen_rest = |_: &Atoms<'_, f64>| Ok(frozen_cost * remaining);
    let continuation = if a.tau >= end {
        Continuation::Terminal
    } else {
        match &l.cfg.family {
            FamilySpec::Eikonal { .. } => Continuation::Value { f: &eikonal_rest, lower_bound: None },
            FamilySpec::Frozen { .. } | FamilySpec::Zero { .. } => {
                Continuation::Value { f: &frozen_rest, lower_bound: Some(frozen_cost * remaining) }
            }
            FamilySpec::Kuramoto { .. } => {
                return Err(CliError::Usage("no continuation value is available for the kuramoto family unless tau = T".into()))
            }
        }
    };
    let mut run = Run::open(&l.out, "dpp-check", format!("{}\n[dpp]\ntau = {}\ntolerance = {}\n", l.cfg, a.tau, a.tolerance))?;
    let r = dpp_residual(&l.initial, family.as_ref(), &dict, &search, a.tau, &continuation, a.tolerance)?;
    run.artifact(
        "dpp.csv",
        &format!(
            "family,t,tau,lhs,lhs_std_error,rhs,rhs_std_error,residual,allowed,pass\n{},{},{},{},{},{},{},{},{},{}\n",
            r.family, r.t, r.tau, r.lhs, r.lhs_std_error, r.rhs, r.rhs_std_error, r.residual, r.allowed, r.pass
        ),
    )?;
    run.check("dpp", r.pass);
    println!("residual {} (allowed {})", r.residual, r.allowed);
    run.finish()
}

/// Clouds of at most four atoms with random positions and weights.
fn random_pair(seed: u64, p: u64, dim: usize) -> CliResult<(TorusMeasure<f64>, TorusMeasure<f64>)> {
    let cloud = |stream: u64| -> CliResult<TorusMeasure<f64>> {
        let mut rng = stream_rng(seed, stream);
        let n = 1 + (uniform::<f64, _>(&mut rng) * 4.0) as usize % 4;
        let coords: Vec<f64> = (0..n * dim).map(|_| uniform::<f64, _>(&mut rng) * std::f64::consts::TAU).collect();
        let raw: Vec<f64> = (0..n).map(|_| 0.1 + uniform::<f64, _>(&mut rng)).collect();
        let total: f64 = raw.iter().sum();
        Ok(ParticleCloud::new(dim, coords, raw.iter().map(|w| w / total).collect())?.into())
    };
    Ok((cloud(2 * p)?, cloud(2 * p + 1)?))
}

fn lipschitz(a: &LipschitzArgs) -> CliResult<()> {
    let l = load(&a.common)?;
    let family = l.cfg.family.build()?;
    let dict = l.cfg.dictionary.build(family.dim())?;
    let search = l.cfg.search()?;
    let mut run = Run::open(&l.out, "lipschitz", l.cfg.to_string())?;
    match a.mode {
        LipschitzMode::Time => {
            let r = lipschitz_probe_time(&l.initial, family.as_ref(), &dict, &search, &a.gaps)?;
            let mut csv = String::from("gap,difference,noise_floor\n");
            for row in &r.rows {
                let _ = writeln!(csv, "{},{},{}", row.gap, row.difference, row.noise_floor);
            }
            run.artifact("lipschitz_time.csv", &csv)?;
            match r.exponent {
                Some(e) => println!("exponent {e}"),
                None => println!("differences below the noise floor"),
            }
            run.check("time_exponent", r.pass);
        }
        LipschitzMode::Space => {
            let seed = derive_seed(l.cfg.seed, tag::PAIRS);
            let pairs = (0..a.pairs as u64).map(|p| random_pair(seed, p, family.dim())).collect::<CliResult<Vec<_>>>()?;
            let r = lipschitz_probe_space(family.as_ref(), &dict, &search, &pairs, l.cfg.cutoff)?;
            let mut csv = String::from("pair,distance,ratio\n");
            for (p, (d, ratio)) in r.distances.iter().zip(&r.ratios).enumerate() {
                let _ = writeln!(csv, "{p},{d},{}", ratio.map(|x| x.to_string()).unwrap_or_default());
            }
            run.artifact("lipschitz_space.csv", &csv)?;
            println!("constant {}", r.constant);
            run.check("space_constant_finite", r.constant.is_finite());
        }
    }
    run.finish()
}

fn acceptance_cmd(a: &AcceptanceArgs) -> CliResult<()> {
    let suite: Suite = a.suite.parse()?;
    let mut run = Run::open(&a.out, "acceptance", format!("suite = {}\nseed = {}\n", suite.name(), a.seed))?;
    let rows = acceptance::run_suite(suite, a.seed)?;
    for r in &rows {
        println!("{} {} {}: observed {:e}, threshold {:e}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.name, r.observed, r.threshold);
        run.check(&r.id, r.pass);
    }
    run.artifact(&format!("acceptance_{}.csv", suite.name()), &acceptance::render_csv(&rows))?;
    run.finish()
}

fn read_csv(path: &Path) -> CliResult<Vec<Vec<String>>> {
    let text = fs::read_to_string(path)?;
    Ok(text.lines().skip(1).filter(|l| !l.is_empty()).map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn number(field: &str, path: &Path) -> CliResult<f64> {
    field.parse().map_err(|_| CliError::Usage(format!("bad number `{field}` in {}", path.display())))
}

fn export(a: &ExportArgs) -> CliResult<()> {
    if !a.dir.join(MANIFEST_FILE).is_file() {
        return Err(CliError::Usage(format!("{} is not a run directory (no {MANIFEST_FILE})", a.dir.display())));
    }
    let previous = RunManifest::read(&a.dir)?;
    let dir = RunDir::create(&a.dir)?;
    let mut manifest = previous.clone();
    let mut written = Vec::new();

    let table = a.dir.join("value_table.csv");
    if table.is_file() {
        let mut out = String::new();
        let mut last_t: Option<String> = None;
        for row in read_csv(&table)? {
            if row.len() != 3 {
                return Err(CliError::Usage(format!("malformed row in {}", table.display())));
            }
            if last_t.as_deref().is_some_and(|t| t != row[0]) {
                out.push('\n');
            }
            let _ = writeln!(out, "{} {} {}", row[0], row[1], row[2]);
            last_t = Some(row[0].clone());
        }
        written.push(("w_surface.dat", out));
    }
    let lip = a.dir.join("lipschitz_time.csv");
    if lip.is_file() {
        let mut out = String::new();
        for row in read_csv(&lip)? {
            let (h, d) = (number(&row[0], &lip)?, number(&row[1], &lip)?);
            if d > 0.0 {
                let _ = writeln!(out, "{} {}", h.ln(), d.ln());
            }
        }
        written.push(("lipschitz.dat", out));
    }
    let dpp = a.dir.join("dpp.csv");
    if dpp.is_file() {
        let mut out = String::new();
        for row in read_csv(&dpp)? {
            if row.len() != 10 {
                return Err(CliError::Usage(format!("malformed row in {}", dpp.display())));
            }
            let _ = writeln!(out, "{} {} {}", row[2], row[7], row[8]);
        }
        written.push(("dpp_residuals.dat", out));
    }
    if written.is_empty() {
        return Err(CliError::Usage(format!("nothing to export in {}", a.dir.display())));
    }
    for (name, contents) in written {
        dir.write(name, &contents)?;
        if !manifest.artifacts.iter().any(|x| x == name) {
            manifest.artifacts.push(name.to_string());
        }
    }
    manifest.write(&dir)
}
