//! Pinned desk-scale checks with their pass thresholds.

use std::fmt::Write as _;
use std::str::FromStr;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use mvtorus::calculus::{
    hamiltonian, linear_derivative_from_tables, ControlDictionary, Control, DiffusionConvention, EikonalFamily, MomentFamily,
    SmoothFunction,
};
use mvtorus::dynamics::{flow_lipschitz_probe, ito_flow_residual, simulate_flow, ControlSignal, HalfSquaredDistance, SimulationConfig};
use mvtorus::metrics::{dual_maximizer, embedding_constant, rho_from_tables, sobolev_norm, w1_circle, DecayCertificate, SobolevWeight};
use mvtorus::rng::{derive_seed, stream_rng, tag, uniform};
use mvtorus::stats::{log_log_slope, mean};
use mvtorus::torus::{circle_distance, fourier_table, mixture, table_of_atoms, Atoms, FourierTable, ParticleCloud, TorusMeasure};
use mvtorus::value::{
    classical_residual, dpp_residual, eikonal_solve, lipschitz_probe_time, oracle_ladder, reduced_value, value_search, Continuation,
    EikonalProblem, OracleLadder, PeriodicLookup, SearchConfig, ValueTable,
};
use mvtorus::Complex;

use crate::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 20_241_016;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Metrics,
    Calculus,
    Dynamics,
    Value,
    All,
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "metrics" => Ok(Suite::Metrics),
            "calculus" => Ok(Suite::Calculus),
            "dynamics" => Ok(Suite::Dynamics),
            "value" => Ok(Suite::Value),
            "all" => Ok(Suite::All),
            other => Err(CliError::Usage(format!("unknown suite `{other}` (expected metrics, calculus, dynamics, value or all)"))),
        }
    }
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Metrics => "metrics",
            Suite::Calculus => "calculus",
            Suite::Dynamics => "dynamics",
            Suite::Value => "value",
            Suite::All => "all",
        }
    }
}

/// One line of an acceptance report.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionRow {
    pub id: String,
    pub name: String,
    pub pass: bool,
    pub observed: f64,
    pub threshold: f64,
    pub detail: String,
}

fn row(id: &str, name: &str, pass: bool, observed: f64, threshold: f64, detail: String) -> CriterionRow {
    CriterionRow { id: id.into(), name: name.into(), pass, observed, threshold, detail }
}

type Check = fn(u64) -> CliResult<Vec<CriterionRow>>;

/// A group of rows produced together, with its wall-clock budget.
#[derive(Clone, Copy)]
pub struct Criterion {
    pub id: &'static str,
    pub suite: Suite,
    pub budget_seconds: f64,
    check: Check,
}

impl Criterion {
    pub fn run(&self, seed: u64) -> CliResult<Vec<CriterionRow>> {
        (self.check)(seed)
    }
}

/// Every criterion in report order.
pub fn criteria() -> Vec<Criterion> {
    let c = |id, suite, budget_seconds, check: Check| Criterion { id, suite, budget_seconds, check };
    vec![
        c("C1", Suite::Metrics, 30.0, duality_saturation),
        c("C3", Suite::Metrics, 60.0, embedding),
        c("C2", Suite::Calculus, 60.0, derivative_identity),
        c("P1", Suite::Calculus, 600.0, |_| hamiltonian_identity()),
        c("C4", Suite::Dynamics, 600.0, flow_lipschitz),
        c("C8", Suite::Dynamics, 600.0, ito_along_flows),
        c("C5", Suite::Value, 600.0, eikonal_reduction),
        c("C6", Suite::Value, 600.0, dynamic_programming),
        c("C7", Suite::Value, 600.0, time_regularity),
        c("P2", Suite::Value, 600.0, |_| classical_solution()),
    ]
}

pub fn run_suite(suite: Suite, seed: u64) -> CliResult<Vec<CriterionRow>> {
    let mut rows = Vec::new();
    for c in criteria().iter().filter(|c| suite == Suite::All || c.suite == suite) {
        rows.extend(c.run(seed)?);
    }
    Ok(rows)
}

pub fn render_csv(rows: &[CriterionRow]) -> String {
    let mut out = String::from("id,name,pass,observed,threshold,detail\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:e},{:e},{}",
            r.id,
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.observed,
            r.threshold,
            r.detail.replace(',', ";")
        );
    }
    out
}

fn cosine_potential() -> CliResult<PeriodicLookup<f64>> {
    Ok(PeriodicLookup::from_fn(4096, |y: f64| 1.0 + y.cos())?)
}

fn eikonal_family(sigma: f64) -> CliResult<EikonalFamily<f64>> {
    Ok(EikonalFamily::new(cosine_potential()?, sigma))
}

fn eikonal_table(steps: usize) -> CliResult<ValueTable<f64>> {
    Ok(eikonal_solve(&EikonalProblem::new(cosine_potential()?, steps, steps)?)?)
}

/// Up to `max_atoms` atoms at uniform positions with weights bounded away
/// from zero.
fn random_cloud(seed: u64, stream: u64, max_atoms: usize) -> CliResult<ParticleCloud<f64>> {
    let mut rng = stream_rng(seed, stream);
    let n = 1 + ((uniform::<f64, _>(&mut rng) * max_atoms as f64) as usize).min(max_atoms - 1);
    let coords: Vec<f64> = (0..n).map(|_| uniform::<f64, _>(&mut rng) * std::f64::consts::TAU).collect();
    let raw: Vec<f64> = (0..n).map(|_| 0.1 + uniform::<f64, _>(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    Ok(ParticleCloud::new(1, coords, raw.iter().map(|w| w / total).collect())?)
}

/// Like [`random_cloud`] but with weights that are multiples of `1/units`.
fn lattice_cloud(seed: u64, stream: u64, max_atoms: usize, units: usize) -> CliResult<ParticleCloud<f64>> {
    let base = random_cloud(seed, stream, max_atoms)?;
    let mut counts: Vec<usize> = base.weights().iter().map(|w| (w * units as f64).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    counts[0] += units - assigned;
    Ok(ParticleCloud::new(1, base.coords().to_vec(), counts.iter().map(|&c| c as f64 / units as f64).collect())?)
}

/// Real trigonometric polynomial with random coefficients scaled to unit
/// Sobolev norm.
fn random_unit_function(seed: u64, stream: u64, weight: SobolevWeight<f64>, cutoff: usize) -> CliResult<FourierTable<f64>> {
    let mut rng = stream_rng(seed, stream);
    let mut f = FourierTable::zeros(1, cutoff)?;
    for i in 0..f.len() {
        let k = f.wavevector(i)[0] as f64;
        let scale = (1.0 + k * k).powf(-weight.lambda() / 2.0);
        f.coeffs_mut()[i] = Complex::new(uniform::<f64, _>(&mut rng) - 0.5, uniform::<f64, _>(&mut rng) - 0.5) * scale;
    }
    for i in 0..f.len() {
        let m = f.mirror(i);
        if i < m {
            let c = f.coeffs()[i];
            f.coeffs_mut()[m] = c.conj();
        } else if i == m {
            f.coeffs_mut()[i].im = 0.0;
        }
    }
    let norm = sobolev_norm(&f, weight, cutoff, Some(DecayCertificate::TrigPolynomial))?.value;
    Ok(f.scaled(1.0 / norm))
}

fn duality_saturation(seed: u64) -> CliResult<Vec<CriterionRow>> {
    let (cutoff, pairs, competitors) = (64, 200, 100);
    let weight = SobolevWeight::new(3.0, 1)?;
    let pair_seed = derive_seed(seed, tag::PAIRS);
    let comp_seed = derive_seed(seed, tag::COMPETITORS);
    let (mut worst_defect, mut worst_excess, mut allowed) = (0.0f64, f64::NEG_INFINITY, 0.0);
    for p in 0..pairs {
        let mu: TorusMeasure<f64> = random_cloud(pair_seed, 2 * p, 8)?.into();
        let nu: TorusMeasure<f64> = random_cloud(pair_seed, 2 * p + 1, 8)?.into();
        let (fm, fnu) = (fourier_table(&mu, cutoff)?, fourier_table(&nu, cutoff)?);
        let rho = rho_from_tables(&fm, &fnu, weight)?;
        allowed = 1e-6 + rho.truncation_error;
        let eta = fm.sub(&fnu)?;
        let dual = dual_maximizer(&eta, weight)?;
        if dual.degenerate {
            continue;
        }
        let norm = sobolev_norm(&dual.function, weight, cutoff, Some(DecayCertificate::TrigPolynomial))?.value;
        let attained = dual.function.pair_with_measure(&eta)? / norm;
        worst_defect = worst_defect.max((attained - rho.value).abs());
        for c in 0..competitors {
            let f = random_unit_function(comp_seed, (p * competitors + c) as u64, weight, cutoff)?;
            worst_excess = worst_excess.max(f.pair_with_measure(&eta)? - attained);
        }
    }
    let pass = worst_defect <= allowed && worst_excess <= 1e-12;
    Ok(vec![row(
        "C1",
        "metric duality saturation",
        pass,
        worst_defect,
        allowed,
        format!("{pairs} pairs; K={cutoff}; lambda=3; largest competitor excess {worst_excess:e}"),
    )])
}

fn lp_transport(mu: &ParticleCloud<f64>, nu: &ParticleCloud<f64>) -> CliResult<f64> {
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<_>> = (0..mu.len())
        .map(|i| (0..nu.len()).map(|j| problem.add_var(circle_distance(mu.point(i)[0], nu.point(j)[0]), (0.0, f64::INFINITY))).collect())
        .collect();
    for (i, row) in vars.iter().enumerate() {
        let expr: Vec<_> = row.iter().map(|&v| (v, 1.0)).collect();
        problem.add_constraint(expr.as_slice(), ComparisonOp::Eq, mu.weights()[i]);
    }
    // The last column constraint is implied by the others.
    for j in 0..nu.len().saturating_sub(1) {
        let expr: Vec<_> = vars.iter().map(|r| (r[j], 1.0)).collect();
        problem.add_constraint(expr.as_slice(), ComparisonOp::Eq, nu.weights()[j]);
    }
    let solution = problem.solve().map_err(|e| CliError::Failed(format!("transport LP failed: {e}")))?;
    Ok(solution.objective())
}

fn embedding(seed: u64) -> CliResult<Vec<CriterionRow>> {
    let cutoff = 4096;
    let weight = SobolevWeight::new(1.0, 1)?;
    let c = embedding_constant::<f64>(1, 1)?;
    let pair_seed = derive_seed(derive_seed(seed, tag::PAIRS), 3);
    let mut worst = f64::NEG_INFINITY;
    for p in 0..500u64 {
        let mu = random_cloud(pair_seed, 2 * p, 8)?;
        let nu = random_cloud(pair_seed, 2 * p + 1, 8)?;
        let rho = rho_from_tables(&table_of_atoms(&mu.atoms(), cutoff)?, &table_of_atoms(&nu.atoms(), cutoff)?, weight)?;
        worst = worst.max(w1_circle(&mu, &nu)? - c * rho.value);
    }
    let lp_seed = derive_seed(derive_seed(seed, tag::PAIRS), 4);
    let mut lp_gap = 0.0f64;
    for p in 0..100u64 {
        let mu = random_cloud(lp_seed, 2 * p, 5)?;
        let nu = random_cloud(lp_seed, 2 * p + 1, 5)?;
        lp_gap = lp_gap.max((w1_circle(&mu, &nu)? - lp_transport(&mu, &nu)?).abs());
    }
    Ok(vec![
        row(
            "C3a",
            "circle W1 below embedding bound",
            worst <= 1e-8,
            worst,
            1e-8,
            format!("500 pairs; max of w1 - c*rho_1; c={c}; K={cutoff}"),
        ),
        row("C3b", "circle W1 matches transport LP", lp_gap <= 1e-10, lp_gap, 1e-10, "100 pairs of at most 5 atoms".into()),
    ])
}

fn derivative_identity(seed: u64) -> CliResult<Vec<CriterionRow>> {
    let cutoff = 64;
    let weight = SobolevWeight::star(1)?;
    let pair_seed = derive_seed(derive_seed(seed, tag::PAIRS), 5);
    let trunc = weight.truncation_error(cutoff);
    let mut worst = 0.0f64;
    let mut min_slope = f64::INFINITY;
    let taus = [1e-1, 1e-2, 1e-3, 1e-4];
    for p in 0..200u64 {
        let mu: TorusMeasure<f64> = random_cloud(pair_seed, 3 * p, 8)?.into();
        let nu: TorusMeasure<f64> = random_cloud(pair_seed, 3 * p + 1, 8)?.into();
        let (fm, fnu) = (fourier_table(&mu, cutoff)?, fourier_table(&nu, cutoff)?);
        let rho = rho_from_tables(&fm, &fnu, weight)?.value;
        let gamma = linear_derivative_from_tables(&fm, &fnu, weight)?;
        let norm = sobolev_norm(&gamma.table, weight, cutoff, Some(DecayCertificate::TrigPolynomial))?.value;
        worst = worst.max((norm - rho).abs());
        if p < 20 {
            let target: TorusMeasure<f64> = random_cloud(pair_seed, 3 * p + 2, 8)?.into();
            let direction = fourier_table(&target, cutoff)?.sub(&fm)?;
            let slope_term = gamma.table.pair_with_measure(&direction)?;
            let h0 = 0.5 * rho * rho;
            let defects: Vec<f64> = taus
                .iter()
                .map(|&tau| {
                    let moved = fourier_table(&mixture(&mu, &target, tau)?, cutoff)?;
                    let r = rho_from_tables(&moved, &fnu, weight)?.value;
                    Ok((0.5 * r * r - h0 - tau * slope_term).abs())
                })
                .collect::<mvtorus::Result<_>>()?;
            min_slope = min_slope.min(log_log_slope(&taus, &defects).unwrap_or(f64::NAN));
        }
    }
    Ok(vec![
        row(
            "C2a",
            "derivative norm equals distance",
            worst <= 2.0 * trunc,
            worst,
            2.0 * trunc,
            format!("200 pairs; K={cutoff}; lambda=3"),
        ),
        row(
            "C2b",
            "finite-difference defect slope",
            min_slope >= 1.9,
            min_slope,
            1.9,
            "20 directions; tau from 1e-1 to 1e-4; smallest slope".into(),
        ),
    ])
}

/// `∂_y w` by central differences on the table grid.
fn space_derivative(table: &ValueTable<f64>, t: f64, y: f64) -> f64 {
    let h = std::f64::consts::TAU / table.ys().len() as f64;
    (table.eval(t, y + h) - table.eval(t, y - h)) / (2.0 * h)
}

fn hamiltonian_identity() -> CliResult<Vec<CriterionRow>> {
    let table = eikonal_table(400)?;
    let family = eikonal_family(1.0)?;
    let dict = ControlDictionary::constant_grid(-2.0, 2.0, 401);
    let mut worst = 0.0f64;
    for t in [0.25, 0.5] {
        for m in [-2.0f64, -1.0, 0.0, 1.0, 2.0] {
            let p = space_derivative(&table, t, m);
            // Test function with the gradient of v at a point mass: p·sin(x − m).
            let gamma = FourierTable::sine(1, &[1], p * m.cos())?.combine(1.0, &FourierTable::cosine(1, &[1], -p * m.sin())?, 1.0)?;
            let h = hamiltonian(&TorusMeasure::dirac(&[m])?, &SmoothFunction::polynomial(gamma), &dict, &family, DiffusionConvention::Half)?;
            worst = worst.max((h.value - (-0.5 * p * p + 1.0 + m.cos())).abs());
        }
    }
    Ok(vec![row(
        "P1",
        "hamiltonian identity for the eikonal value",
        worst <= 3e-2,
        worst,
        3e-2,
        "t in {0.25;0.5}; m in {-2..2}; 401 constant controls".into(),
    )])
}

fn flow_lipschitz(seed: u64) -> CliResult<Vec<CriterionRow>> {
    let family = eikonal_family(1.0)?;
    let pair_seed = derive_seed(derive_seed(seed, tag::PAIRS), 6);
    let pairs = (0..50u64)
        .map(|p| Ok((lattice_cloud(pair_seed, 2 * p, 8, 2000)?.into(), lattice_cloud(pair_seed, 2 * p + 1, 8, 2000)?.into())))
        .collect::<CliResult<Vec<(TorusMeasure<f64>, TorusMeasure<f64>)>>>()?;
    let signal = ControlSignal::constant(Control::Constant(vec![0.5]), 0.0, 1.0)?;
    let checkpoints = [250, 500, 750, 1000];
    let mut c_hat = Vec::new();
    let mut detail = String::new();
    for n in [2000, 8000] {
        let cfg = SimulationConfig::new(n, 1e-3, 0.0, 1.0, derive_seed(seed, 6))?;
        let report = flow_lipschitz_probe(&pairs, &signal, &family, &cfg, &checkpoints, 32)?;
        let _ = write!(detail, "N={n}: c_hat={:.6} skipped={} running={:?}; ", report.c_hat(), report.skipped.len(), report.running_c_hat);
        c_hat.push(report.c_hat());
    }
    let drift = (c_hat[0] / c_hat[1] - 1.0).abs();
    Ok(vec![row(
        "C4",
        "flow Lipschitz constant stable in N",
        c_hat.iter().all(|c| c.is_finite() && *c > 0.0) && drift <= 0.2,
        drift,
        0.2,
        detail.trim_end().to_string(),
    )])
}

fn ito_along_flows(seed: u64) -> CliResult<Vec<CriterionRow>> {
    let family = eikonal_family(1.0)?;
    let weight = SobolevWeight::star(1)?;
    let psi = HalfSquaredDistance::new(&TorusMeasure::dirac(&[std::f64::consts::PI])?, weight, 16)?;
    let start = TorusMeasure::dirac(&[0.0])?;
    let signal = ControlSignal::constant(Control::Constant(vec![0.0]), 0.0, 1.0)?;
    let mut means = Vec::new();
    for dt in [0.1, 0.05] {
        let mut residuals = Vec::new();
        for s in 0..16u64 {
            let cfg = SimulationConfig::new(4000, dt, 0.0, 1.0, derive_seed(derive_seed(seed, 8), s))?;
            let traj = simulate_flow(&start, &signal, &family, &cfg)?;
            residuals.push(ito_flow_residual(&psi, &traj, &family, DiffusionConvention::Half)?.residual);
        }
        means.push(mean(&residuals));
    }
    let ratio = means[1] / means[0];
    Ok(vec![row(
        "C8",
        "Ito residual halves with the time step",
        (0.35..=0.65).contains(&ratio),
        ratio,
        0.5,
        format!("mean residual dt=0.1: {:e}; dt=0.05: {:e}; allowed ratio 0.35..0.65", means[0], means[1]),
    )])
}

fn eikonal_reduction(seed: u64) -> CliResult<Vec<CriterionRow>> {
    let problem = EikonalProblem::new(cosine_potential()?, 200, 200)?;
    let lf = eikonal_solve(&problem)?;
    let oracle = oracle_ladder(&problem, &OracleLadder::default())?;
    let gap = lf.sup_distance(&oracle.table);
    let mut rows = vec![row(
        "C5a",
        "eikonal sweep matches path oracle",
        oracle.converged && gap <= 2e-2,
        gap,
        2e-2,
        format!("200x200 grid; oracle levels {} last change {:e}; w(0;0)={}", oracle.levels, oracle.last_change, lf.eval(0.0, 0.0)),
    )];
    let dict = ControlDictionary::constant_grid(-2.0, 2.0, 9);
    let sim = SimulationConfig::new(2000, 0.05, 0.0, 1.0, derive_seed(seed, 5))?;
    let cfg = SearchConfig::new(sim, 32, 4)?;
    let origin = TorusMeasure::dirac(&[0.0])?;
    let noisy = value_search(&origin, &eikonal_family(1.0)?, &dict, &cfg, &Continuation::Terminal)?;
    let reduced = reduced_value(0.0, &origin.atoms(), &lf)?;
    let upper_gap = noisy.value - reduced.value;
    rows.push(row(
        "C5b",
        "value search upper-bounds the reduced value",
        !noisy.partial && !reduced.ambiguous && upper_gap >= -3.0 * noisy.std_error && upper_gap <= 5e-2,
        upper_gap,
        5e-2,
        format!("search {} +- {:e}; reduced {}; nodes {}", noisy.value, noisy.std_error, reduced.value, noisy.nodes),
    ));
    // Without noise every replicate is identical, so two suffice.
    let quiet = value_search(&origin, &eikonal_family(0.0)?, &dict, &SearchConfig { reps: 2, ..cfg.clone() }, &Continuation::Terminal)?;
    // The lifted mean of N noisy particles has variance at most u/N, which
    // moves E[L(m)] by at most ½‖L''‖u/N with ‖L''‖ = 1 here.
    let allowance = 3.0 * noisy.std_error + 1.0 / (4.0 * cfg.sim.particles as f64);
    let diff = (quiet.value - noisy.value).abs();
    rows.push(row(
        "P3",
        "value search insensitive to sigma",
        diff <= allowance,
        diff,
        allowance,
        format!("sigma=0 {} vs sigma=1 {}", quiet.value, noisy.value),
    ));
    Ok(rows)
}

fn dynamic_programming(seed: u64) -> CliResult<Vec<CriterionRow>> {
    let origin = TorusMeasure::dirac(&[0.0])?;
    let mut rows = Vec::new();

    let small = SearchConfig::new(SimulationConfig::new(200, 0.05, 0.0, 1.0, derive_seed(seed, 61))?, 4, 2)?;
    let dict5 = ControlDictionary::constant_grid(-2.0, 2.0, 5);
    let terminal = dpp_residual(&origin, &eikonal_family(1.0)?, &dict5, &small, 1.0, &Continuation::Terminal, 1e-10)?;
    rows.push(row(
        "C6a",
        "DPP residual at tau = T",
        terminal.pass && terminal.residual.abs() <= 1e-10,
        terminal.residual.abs(),
        1e-10,
        format!("eikonal; lhs {} rhs {}", terminal.lhs, terminal.rhs),
    ));

    let frozen = MomentFamily::frozen(1, 1.0);
    let rest = |_: &Atoms<'_, f64>| Ok(0.5);
    let cont = Continuation::Value { f: &rest, lower_bound: Some(0.5) };
    let unit = dpp_residual(&origin, &frozen, &dict5, &small, 0.5, &cont, 1e-10)?;
    rows.push(row(
        "C6b",
        "DPP residual for frozen unit cost",
        unit.pass,
        unit.residual.abs(),
        unit.allowed,
        format!("lhs {} rhs {}", unit.lhs, unit.rhs),
    ));

    let table = eikonal_table(200)?;
    let later = |a: &Atoms<'_, f64>| Ok(reduced_value(0.5, a, &table)?.value);
    let cont = Continuation::Value { f: &later, lower_bound: Some(0.0) };
    let cfg = SearchConfig::new(SimulationConfig::new(1000, 0.05, 0.0, 1.0, derive_seed(seed, 62))?, 16, 4)?;
    let dict9 = ControlDictionary::constant_grid(-2.0, 2.0, 9);
    let eik = dpp_residual(&origin, &eikonal_family(1.0)?, &dict9, &cfg, 0.5, &cont, 5e-2)?;
    rows.push(row(
        "C6c",
        "DPP residual for the eikonal family",
        eik.pass,
        eik.residual.abs(),
        eik.allowed,
        format!("t=0 tau=0.5; lhs {} +- {:e}; rhs {} +- {:e}", eik.lhs, eik.lhs_std_error, eik.rhs, eik.rhs_std_error),
    ));
    Ok(rows)
}

fn time_regularity(seed: u64) -> CliResult<Vec<CriterionRow>> {
    let cfg = SearchConfig::new(SimulationConfig::new(500, 0.05, 0.0, 1.0, derive_seed(seed, 7))?, 8, 2)?;
    let dict = ControlDictionary::constant_grid(-2.0, 2.0, 5);
    let report = lipschitz_probe_time(&TorusMeasure::dirac(&[0.0])?, &eikonal_family(1.0)?, &dict, &cfg, &[0.4, 0.2, 0.1, 0.05])?;
    let diffs: Vec<String> = report.rows.iter().map(|r| format!("h={} d={:.6}", r.gap, r.difference)).collect();
    Ok(vec![row(
        "C7",
        "value Holder exponent in time",
        report.pass,
        report.exponent.unwrap_or(f64::NAN),
        0.45,
        format!("noise floored {}; {}", report.noise_floored, diffs.join(" ")),
    )])
}

fn classical_solution() -> CliResult<Vec<CriterionRow>> {
    let coarse = eikonal_table(200)?;
    let fine = eikonal_table(400)?;
    let r = classical_residual(&fine, &coarse, &cosine_potential()?, 0.05)?;
    Ok(vec![row(
        "P2",
        "eikonal classical residual where smooth",
        r.nodes_checked > 0 && r.max_residual <= 3e-2,
        r.max_residual,
        3e-2,
        format!("{} nodes checked; {} skipped as unstable", r.nodes_checked, r.nodes_skipped),
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("value".parse::<Suite>().unwrap(), Suite::Value);
        assert_eq!("bogus".parse::<Suite>().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn lattice_weights_are_exact_multiples() {
        let c = lattice_cloud(1, 2, 8, 2000).unwrap();
        assert!(c.equal_weight_expansion(2000).is_some());
    }

    #[test]
    fn lp_agrees_on_a_two_point_example() {
        let mu = ParticleCloud::new(1, vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let nu = ParticleCloud::dirac(&[2.0]).unwrap();
        assert!((lp_transport(&mu, &nu).unwrap() - 1.5).abs() < 1e-12);
    }
}
