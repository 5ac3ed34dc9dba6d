use std::fs;
use std::process::Command;

use maxchoice::cli::main_with_args;
use maxchoice::stats::CheckpointSeries;
use maxchoice::theory::TheoryParams;

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut full = vec!["maxchoice"];
    full.extend_from_slice(args);
    let code = main_with_args(full, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn field(text: &str, key: &str) -> f64 {
    let prefix = format!("{key}: ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn theory_d3() {
    let (code, out) = run_cli(&["theory", "--d", "3"]);
    assert_eq!(code, 0);
    assert!((field(&out, "x_star") - 0.76393202).abs() < 1e-8);
    assert!((field(&out, "c") - 0.61803399).abs() < 1e-8);
    assert!((field(&out, "alpha") - 0.57294902).abs() < 1e-8);
    assert!(out.contains("c^(d-1) < 2/d: true"));
}

#[test]
fn theory_d4_json_matches_solver() {
    let (code, out) = run_cli(&["--json", "theory", "--d", "4"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let t = TheoryParams::new(4).unwrap();
    assert_eq!(v["x_star"].as_f64().unwrap(), t.x_star);
    assert_eq!(v["alpha"].as_f64().unwrap(), t.alpha);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run_cli(&["theory", "--d", "2"]).0, 2);
    assert_eq!(run_cli(&["simulate", "--d", "3"]).0, 2);
    assert_eq!(run_cli(&["simulate", "--d", "3", "--n", "10", "--bogus"]).0, 2);
    assert_eq!(run_cli(&["simulate", "--rule", "median", "--n", "10"]).0, 2);
    assert_eq!(run_cli(&["oracle", "--d", "5", "--n", "3"]).0, 2);
    assert_eq!(run_cli(&[]).0, 2);
    assert_eq!(run_cli(&["--help"]).0, 0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_maxchoice");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["simulate", "--d", "3"]), Some(2));
    assert_eq!(status(&["theory", "--d", "2"]), Some(2));
    assert_eq!(status(&["theory", "--d", "3"]), Some(0));
    assert_eq!(
        status(&["report", "--out", "/nonexistent/maxchoice-out"]),
        Some(1)
    );
}

#[test]
fn simulate_writes_geometric_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let (code, out) = run_cli(&[
        "simulate", "--d", "3", "--rule", "max", "--n", "100000", "--k", "3", "--seed", "7", "--out", out_dir,
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("M_1: "));
    assert!(out.contains("x_star: "));
    let csv = fs::read(dir.path().join("replica_0.csv")).unwrap();
    let series = CheckpointSeries::read_csv(csv.as_slice()).unwrap();
    assert_eq!(series.last().unwrap().n, 100_000);
    for w in series.rows.windows(2).filter(|w| w[0].n >= 100) {
        let ratio = w[1].n as f64 / w[0].n as f64;
        assert!(ratio <= 1.06 || w[1].n == 100_000, "{} -> {}", w[0].n, w[1].n);
    }
    assert!(dir.path().join("config.txt").exists());
}

#[test]
fn simulate_d2_omits_theory_with_a_notice() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_cli(&[
        "simulate",
        "--d",
        "2",
        "--n",
        "1000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("notice: "));
    assert!(!out.contains("x_star: "));
}

#[test]
fn simulate_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.txt");
    let out_dir = dir.path().join("out");
    fs::write(
        &cfg,
        format!("rule = min\nhorizon = 2000\nout_dir = {}\n", out_dir.display()),
    )
    .unwrap();
    let (code, out) = run_cli(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "4"]);
    assert_eq!(code, 0, "{out}");
    let echoed = fs::read_to_string(out_dir.join("config.txt")).unwrap();
    assert!(echoed.contains("rule = min"));
    assert!(echoed.contains("seed = 4"));
}

#[test]
fn oracle_prints_exact_fractions() {
    let (code, out) = run_cli(&["oracle", "--d", "3", "--n", "3"]);
    assert_eq!(code, 0);
    assert!(out.contains("P(M_1=3) = 7/8"), "{out}");
    assert!(out.contains("P(M_1=2) = 1/8"));
    assert!(out.contains("total: 1"));
}

#[test]
fn urn_without_steps() {
    let (code, out) = run_cli(&["urn", "--a", "1", "--b", "1", "--steps", "0"]);
    assert_eq!(code, 0);
    assert_eq!(field(&out, "fraction"), 0.5);
}

#[test]
fn ensemble_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let (code, first) = run_cli(&[
        "ensemble",
        "--d",
        "3",
        "--n",
        "20000",
        "--replicas",
        "3",
        "--out",
        out_dir,
    ]);
    assert_eq!(code, 0, "{first}");
    assert!(first.contains("[slopes]"));
    let (code, again) = run_cli(&["report", "--out", out_dir]);
    assert_eq!(code, 0);
    assert_eq!(first, again);
    assert_eq!(fs::read_to_string(dir.path().join("report.txt")).unwrap(), again);
}
