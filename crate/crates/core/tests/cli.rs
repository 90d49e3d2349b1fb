use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_relaxed-bell"));
    cmd.env_remove("RELAXED_BELL_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("relaxed-bell-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn thresholds_at_tsirelson() {
    let out = run(&["thresholds", "--V", "0.828427124746"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["I_V"].as_f64().unwrap() - 0.2071).abs() < 1e-4);
    assert!((v["S_V"].as_f64().unwrap() - 0.5858).abs() < 1e-4);
    assert!(!out.stderr.is_empty());
}

#[test]
fn box_then_analyze() {
    let path = scratch("signalling.json");
    let out = run(&["box", "--kind", "signalling", "--I", "0.3", "--output", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["chsh"]["value"].as_f64(), Some(4.0));
    assert_eq!(v["measures"]["S"].as_f64(), Some(0.4));
    assert_eq!(v["verdict"]["pass"].as_bool(), Some(true));
    assert_eq!(v["verdict"]["equality"].as_bool(), Some(true));
}

#[test]
fn deterministic_box_to_stdout() {
    let out = run(&["box", "--kind", "deterministic", "--outcomes", "+,+,+,-"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["lambdas"][0]["dists"]["XpYp"], serde_json::json!([0.0, 1.0, 0.0, 0.0]));
}

#[test]
fn measurement_dependent_model_skips_verdict() {
    let path = scratch("dependent.json");
    std::fs::write(
        &path,
        r#"{"lambdas": [
            {"label": "a", "weights": {"XY": 1, "XpY": 0, "XYp": 0.5, "XpYp": 0.5},
             "dists": {"XY": [1,0,0,0], "XpY": [1,0,0,0], "XYp": [1,0,0,0], "XpYp": [1,0,0,0]}},
            {"label": "b", "weights": {"XY": 0, "XpY": 1, "XYp": 0.5, "XpYp": 0.5},
             "dists": {"XY": [0,0,0,1], "XpY": [0,0,0,1], "XYp": [0,0,0,1], "XpYp": [0,0,0,1]}}
        ]}"#,
    )
    .unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["measures"]["M"].as_f64(), Some(2.0));
    assert!(v["verdict"].is_null());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn exit_codes() {
    let missing = scratch("does-not-exist.json");
    assert_eq!(run(&["analyze", missing.to_str().unwrap()]).status.code(), Some(1));
    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"lambdas": [{"label": "x", "weight": 1, "dists": {"XY": [0.5, 0.6, 0, 0]}}]}"#).unwrap();
    let out = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert_eq!(run(&["thresholds", "--V", "2.5"]).status.code(), Some(2));
    assert_eq!(run(&["box", "--kind", "nosignal"]).status.code(), Some(2));
    assert_eq!(run(&["oracle", "--I", "0.2", "--S", "x"]).status.code(), Some(2));
}

#[test]
fn singlet_output_is_reproducible() {
    let args = ["singlet", "--w", "0.4", "--samples", "20000", "--seed", "11", "--scan", "--perturbed", "40"];
    let a = run(&args);
    let b = bin().args(args).arg("--threads").arg("1").output().unwrap();
    let c = bin().args(args).env("RELAXED_BELL_THREADS", "3").output().unwrap();
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let v = json(&a);
    assert_eq!(v["seed"].as_u64(), Some(11));
    assert!(v["scan"]["note"].as_str().unwrap().starts_with("evidence only"));
    let other = run(&["singlet", "--w", "0.4", "--samples", "20000", "--seed", "12"]);
    assert_ne!(json(&other)["estimate"], v["estimate"]);
}

#[test]
fn floats_have_at_most_twelve_significant_digits() {
    let out = run(&["singlet", "--w", "0.3", "--samples", "5000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for token in text.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || c == '-')) {
        let mantissa = token.split(['e', 'E']).next().unwrap();
        let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
        let significant = digits.trim_start_matches('0');
        assert!(significant.len() <= 12, "{token}");
    }
}

#[test]
fn oracle_sweep_writes_csv() {
    let csv = scratch("sweep.csv");
    let out = run(&["oracle", "--I", "0,0.25,0.5", "--S", "0,0.5", "--csv", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["cells"].as_u64(), Some(6));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("I,S,max_E"));
}

#[test]
fn info_requires_an_input() {
    assert_eq!(run(&["info"]).status.code(), Some(2));
    let v = json(&run(&["info", "--I", "0.5", "--S", "1"]));
    assert_eq!(v["H_of_I"].as_f64(), Some(1.0));
    assert_eq!(v["C_of_S"].as_f64(), Some(1.0));
}

#[test]
fn singlet_csv_outputs() {
    let (pairs, scan) = (scratch("pairs.csv"), scratch("scan.csv"));
    let out = run(&[
        "singlet", "--samples", "1000", "--scan", "--perturbed", "10", "--w-grid", "0,0.5,1",
        "--csv", pairs.to_str().unwrap(), "--scan-csv", scan.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pairs = std::fs::read_to_string(pairs).unwrap();
    assert_eq!(pairs.lines().next(), Some("pair,E,stderr,analytic"));
    assert_eq!(pairs.lines().count(), 5);
    let scan = std::fs::read_to_string(scan).unwrap();
    assert_eq!(scan.lines().count(), 1 + 3 + 10);
    assert!(scan.lines().nth(1).unwrap().starts_with("mixture,0,0,"));
}
