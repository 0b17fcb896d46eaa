//! End-to-end checks of the binary: flag handling, exit codes, output
//! shapes, and byte-level determinism.

use std::process::{Command, Output};

fn caravan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caravan"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn park_emits_trajectory_csv() {
    let out = caravan(&[
        "park",
        "--law",
        "deterministic:1",
        "--eps",
        "0.25",
        "--seed",
        "1",
        "--out",
        "-",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "step,block_rank,block_start,block_length");
    // masses sum to 0.25 per step: 4 steps, final row is the full circle
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    for step in 1..=4usize {
        let total: f64 = rows
            .iter()
            .filter(|r| r[0] == step.to_string())
            .map(|r| r[3].parse::<f64>().unwrap())
            .sum();
        assert!((total - 0.25 * step as f64).abs() <= 1e-9, "step {step}: {total}");
    }
}

#[test]
fn verify_lamb_passes_and_exits_zero() {
    let out = caravan(&["verify", "--suite", "lamb", "--instances", "25", "--seed", "7"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert_eq!(report["experiment"], "verify:lamb");
}

#[test]
fn moment_trivial_time() {
    let out = caravan(&[
        "moment", "--alpha", "1.5", "--t", "0", "--replicas", "1000", "--seed", "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "alpha,t,mc_estimate,mc_se,quadrature");
    assert_eq!(text.lines().nth(1).unwrap(), "1.5,0,1,0,1");
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = caravan(&["park", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_seed_is_usage_error() {
    let out = caravan(&["park", "--law", "deterministic:1", "--eps", "0.25"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("seed"), "{err}");
}

#[test]
fn config_file_supplies_flags_and_flags_override() {
    let dir = std::env::temp_dir().join(format!("caravan-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        r#"{"law": {"family":"deterministic","value":1.0}, "eps": 0.5, "seed": 9}"#,
    )
    .unwrap();
    // config supplies everything
    let out = caravan(&["--config", config.to_str().unwrap(), "park"]);
    assert!(out.status.success());
    let two_steps = String::from_utf8(out.stdout).unwrap();
    assert!(two_steps.lines().any(|l| l.starts_with("2,")));
    assert!(!two_steps.lines().any(|l| l.starts_with("3,")));
    // flag overrides the config
    let out = caravan(&[
        "--config",
        config.to_str().unwrap(),
        "park",
        "--eps",
        "0.25",
    ]);
    assert!(out.status.success());
    let four_steps = String::from_utf8(out.stdout).unwrap();
    assert!(four_steps.lines().any(|l| l.starts_with("4,")));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn same_argv_same_bytes() {
    let args = [
        "limit",
        "--law",
        "pareto:1.5,1",
        "--t",
        "0.5",
        "1",
        "--replicas",
        "5",
        "--delta",
        "0.01",
        "--grid",
        "1024",
        "--seed",
        "11",
    ];
    let a = caravan(&args);
    let b = caravan(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "replica,t,rank,mass");
    assert!(text.lines().count() > 5);
}

#[test]
fn converge_reports_ks_schema() {
    let out = caravan(&[
        "converge",
        "--law",
        "deterministic:1",
        "--eps",
        "0.05",
        "--t",
        "1",
        "--replicas",
        "40",
        "--grid",
        "4096",
        "--threshold",
        "1.0",
        "--seed",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["experiment"], "converge");
    let ks = report["ks"].as_array().unwrap();
    assert_eq!(ks[0]["t"], 1.0);
    assert_eq!(ks[0]["rank"], 1);
    assert!(ks[0]["value"].is_number());
    assert!(report["pass"].is_boolean());
}

#[test]
fn discrete_equivalence_via_cli() {
    let out = caravan(&[
        "discrete", "--n", "50", "--law", "geometric:0.5", "--runs", "10", "--seed", "4",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
}
