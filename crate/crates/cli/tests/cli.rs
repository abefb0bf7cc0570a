use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mvtorus::value::{eikonal_solve, EikonalProblem, PeriodicLookup};
use mvtorus_cli::manifest::{RunManifest, LOCK_FILE, MANIFEST_FILE};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn mvtorus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvtorus")).args(args).output().expect("run mvtorus")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn metric_between_antipodal_points() {
    let o = mvtorus(&["metric", s(&fixture("origin.txt")), s(&fixture("antipode.txt")), "--lambda", "3", "--cutoff", "64"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("value,truncation_error,cutoff"));
    let fields: Vec<f64> = lines.next().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    // F_k(δ_0 − δ_π) = (2π)^{-1/2}(1 − (−1)^k): only odd k contribute.
    let exact: f64 = (1..=64i64).filter(|k| k % 2 == 1).map(|k| 2.0 * 4.0 / TAU * (1.0 + (k * k) as f64).powi(-3)).sum::<f64>().sqrt();
    assert!((fields[0] - exact).abs() < 1e-14, "{} vs {exact}", fields[0]);
    // The reported error must cover the true tail, computed here far out.
    let full: f64 = (1..=100_001i64).step_by(2).map(|k| 2.0 * 4.0 / TAU * (1.0 + (k * k) as f64).powi(-3)).sum::<f64>().sqrt();
    assert!(full - fields[0] <= fields[1] && fields[1] < 1e-4, "{} vs tail {}", fields[1], full - fields[0]);
    assert_eq!(fields[2], 64.0);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(mvtorus(&["metric", "--bogus"]).status.code(), Some(2));
    assert_eq!(mvtorus(&["metric", "missing-a.txt", "missing-b.txt"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mvtorus(&["acceptance", "nonsense", "--out", s(dir.path())]).status.code(), Some(2));
    assert_eq!(mvtorus(&["export", s(dir.path())]).status.code(), Some(2));
}

#[test]
fn help_lists_every_flag() {
    let o = mvtorus(&["eikonal", "--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for flag in ["--potential", "--nodes", "--time-steps", "--space-nodes", "--out", "--oracle"] {
        assert!(text.contains(flag), "missing {flag}");
    }
    let top = stdout(&mvtorus(&["--help"]));
    for cmd in ["metric", "hamiltonian", "simulate", "eikonal", "value", "dpp-check", "lipschitz", "acceptance", "export"] {
        assert!(top.contains(cmd), "missing {cmd}");
    }
}

#[test]
fn eikonal_run_exports_the_same_surface_as_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w");
    let o = mvtorus(&["eikonal", "--potential", "const 1; cos 1 1", "--nodes", "1024", "--time-steps", "40", "--space-nodes", "32", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.join(LOCK_FILE).exists());
    let manifest = RunManifest::read(&out).unwrap();
    assert_eq!(manifest.command, "eikonal");
    assert!(manifest.artifacts.contains(&"value_table.csv".to_string()));

    assert!(mvtorus(&["export", s(&out)]).status.success());
    let exported = fs::read_to_string(out.join("w_surface.dat")).unwrap();
    let table = eikonal_solve(&EikonalProblem::new(PeriodicLookup::from_fn(1024, |y: f64| 1.0 + y.cos()).unwrap(), 40, 32).unwrap()).unwrap();
    let mut expected = Vec::new();
    table.write_surface(&mut expected).unwrap();
    let expected = String::from_utf8(expected).unwrap();
    let (got, want): (Vec<&str>, Vec<&str>) = (exported.trim_end().lines().collect(), expected.trim_end().lines().collect());
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        let parse = |l: &str| l.split_whitespace().map(|f| f.parse::<f64>().unwrap()).collect::<Vec<_>>();
        let (g, w) = (parse(g), parse(w));
        assert_eq!(g.len(), w.len());
        assert!(g.iter().zip(&w).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs())), "{g:?} vs {w:?}");
    }
    assert!(RunManifest::read(&out).unwrap().artifacts.contains(&"w_surface.dat".to_string()));
}

#[test]
fn locked_run_directories_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(LOCK_FILE), "").unwrap();
    let o = mvtorus(&["eikonal", "--potential", "const 1", "--time-steps", "4", "--space-nodes", "8", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join(MANIFEST_FILE).exists());
}

#[test]
fn frozen_config_simulates_and_checks_dpp() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let o = mvtorus(&["simulate", "--config", s(&fixture("frozen.cfg")), "--out", s(&sim), "--save-every", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(sim.join("payoff.csv")).unwrap(), "payoff\n1\n");
    for j in [0, 5, 10] {
        assert!(sim.join(format!("laws_{j}.txt")).is_file());
    }
    assert!(!sim.join("laws_3.txt").exists());

    let dpp = dir.path().join("dpp");
    let o = mvtorus(&["dpp-check", "--config", s(&fixture("frozen.cfg")), "--out", s(&dpp), "--tau", "0.5", "--tolerance", "1e-10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = RunManifest::read(&dpp).unwrap();
    assert_eq!(manifest.checks, vec![("dpp".to_string(), true)]);
    assert!(mvtorus(&["export", s(&dpp)]).status.success());
    let line = fs::read_to_string(dpp.join("dpp_residuals.dat")).unwrap();
    let fields: Vec<f64> = line.split_whitespace().map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields[0], 0.5);
    assert!(fields[1].abs() < 1e-12);
}

#[test]
fn value_and_lipschitz_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("eikonal.cfg");
    // Lipschitz runs exit 1 when the fitted exponent misses its target; the
    // artifacts are written either way.
    let run = |name: &str, extra: &[&str]| -> String {
        let out = dir.path().join(name);
        let mut args = vec![extra[0], "--config", s(&cfg), "--out", s(&out)];
        args.extend_from_slice(&extra[1..]);
        let o = mvtorus(&args);
        assert!(matches!(o.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).find(|p| p.extension().is_some_and(|x| x == "csv")).unwrap();
        fs::read_to_string(csv).unwrap()
    };
    let a = run("v1", &["value"]);
    assert!(RunManifest::read(&dir.path().join("v1")).unwrap().checks.iter().all(|c| c.1));
    assert_eq!(a, run("v2", &["value"]));
    assert!(a.starts_with("value,std_error,nodes,partial,choice\n"));

    let t = run("time", &["lipschitz", "--mode", "time", "--gaps", "0.5,0.4,0.3,0.2"]);
    assert_eq!(t.lines().count(), 5);
    assert!(mvtorus(&["export", s(&dir.path().join("time"))]).status.success());
    let sp = run("space", &["lipschitz", "--mode", "space", "--pairs", "3"]);
    assert_eq!(sp.lines().count(), 4);
}

#[test]
fn hamiltonian_command_reports_the_minimizer() {
    // Frozen family: H = 1 for every control, so the first entry wins.
    let o = mvtorus(&["hamiltonian", "--config", s(&fixture("frozen.cfg")), "--measure", s(&fixture("two_atoms.txt")), "--gamma", "sin 1 1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().nth(1), Some("1,0,const(-1)"));
}
