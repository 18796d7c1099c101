//! The binary's documented interface: examples, config files, exit codes,
//! traces and reproducibility.

use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn hypercone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypercone")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn constants_example() {
    let v = json(&hypercone(&["constants", "--p", "2", "--q", "4", "--N", "2", "--avr", "0.5", "--t", "1"]));
    assert_eq!(v["schema"], 1);
    assert!((v["M"].as_f64().unwrap() - 0.620403).abs() < 1e-6);
    assert_eq!(v["extremizer"]["alpha0"], 0.125);
    assert_eq!(v["extremizer"]["a"], 2.0);
    assert!(v["tolerances"]["closed_form_relative"].is_number());
}

#[test]
fn norm_example_on_half_plane() {
    let v = json(&hypercone(&["norm", "--space", "cone", "--theta", "pi", "--p", "2", "--q", "4", "--t", "1"]));
    assert!(v["relative_gap"].as_f64().unwrap().abs() < 0.01);
    assert_eq!(v["method"], "power_iteration");
}

#[test]
fn boundary_norm_accepts_inf() {
    let v = json(&hypercone(&["norm", "--space", "cone", "--theta", "pi", "--p", "1", "--q", "inf", "--t", "2"]));
    assert!(v["relative_gap"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn rigidity_example() {
    let v = json(&hypercone(&["rigidity", "--n", "2", "--K", "0.6"]));
    let delta = v["table"]["rows"][0]["delta"]["value"].as_f64().unwrap();
    assert!((delta / 5.13e-7 - 1.0).abs() < 1e-3);
    assert_eq!(v["topology"]["simply_connected"], true);
    let text = hypercone(&["rigidity", "--n", "2", "--format", "text"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("5.130"));
}

#[test]
fn validation_errors_exit_one() {
    assert_eq!(hypercone(&["norm", "--space", "cone", "--p", "2", "--q", "4", "--t", "1"]).status.code(), Some(1));
    assert_eq!(hypercone(&["constants", "--p", "4", "--q", "2", "--N", "2", "--avr", "1", "--t", "1"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"command": "rigidity", "n": 2, "colour": "red"}"#).unwrap();
    assert_eq!(hypercone(&["--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn numerical_failures_exit_two() {
    // 64 nodes cannot resolve the kernel at the first flow step
    let out = hypercone(&[
        "flow", "--space", "cone", "--theta", "pi", "--p", "2", "--q", "4", "--t", "1", "--points", "64",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_drives_a_run_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"command": "constants", "p": 2, "q": "inf", "N": 2, "avr": 1, "t": 1}"#).unwrap();
    let v = json(&hypercone(&["--config", cfg.to_str().unwrap()]));
    assert_eq!(v["inputs"]["t"], 1.0);
    let v = json(&hypercone(&["constants", "--config", cfg.to_str().unwrap(), "--t", "2"]));
    assert_eq!(v["inputs"]["t"], 2.0);
}

#[test]
fn flow_writes_csv_trace() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("traces");
    let out = dir.path().join("flow.json");
    let status = hypercone(&[
        "flow", "--space", "cone", "--theta", "pi", "--p", "2", "--q", "4", "--t", "1", "--points", "512",
        "--steps", "10", "--trace-dir", traces.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!((v["final_ratio"].as_f64().unwrap() - 1.0).abs() < 5e-3);
    let csv = fs::read_to_string(traces.join("flow.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,p,m,V"));
    assert_eq!(lines.count(), 11);
    let energy = fs::read_to_string(traces.join("energy.csv")).unwrap();
    assert!(energy.starts_with("s,E,logE,convexity_slack\n"));
    assert_eq!(energy.lines().count(), 11);
    assert!(v["energy"]["min_convexity_slack"].as_f64().unwrap() >= -1e-12);
}

#[test]
fn norm_writes_scaled_trace() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&hypercone(&[
        "norm", "--space", "cone", "--theta", "pi", "--p", "2", "--q", "4", "--t", "1", "--times", "0.5,1,2",
        "--trace-dir", dir.path().to_str().unwrap(),
    ]));
    // on a cone the scaled norm does not depend on t
    assert!(v["trace_max_relative_deviation"].as_f64().unwrap() < 1e-6);
    let csv = fs::read_to_string(dir.path().join("norm_trace.csv")).unwrap();
    assert!(csv.starts_with("t,estimate,scaled\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn li_limit_trace_on_half_plane() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&hypercone(&[
        "li-limit", "--space", "cone", "--theta", "pi", "--x", "1,0", "--y", "2,1", "--times", "100,10000",
        "--trace-dir", dir.path().to_str().unwrap(),
    ]));
    assert!(v["time_error"].as_f64().unwrap() < 0.01);
    assert!(fs::read_to_string(dir.path().join("li_limit.csv")).unwrap().starts_with("t,h,volume_scaled,time_scaled\n"));
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let args = ["logsob", "--space", "cone", "--theta", "3pi/2", "--points", "256", "--samples", "20", "--seed", "7"];
    let a = hypercone(&args);
    let b = hypercone(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = hypercone(&["logsob", "--space", "cone", "--theta", "3pi/2", "--points", "256", "--samples", "20", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn verify_selected_criteria() {
    let v = json(&hypercone(&["verify", "--criterion", "2,12"]));
    assert_eq!(v["passed"], true);
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 2);
    assert_eq!(hypercone(&["verify", "--criterion", "14"]).status.code(), Some(1));
}

#[test]
fn thread_cap_from_environment() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_hypercone"))
            .args(["rigidity", "--n", "3"])
            .env("HYPERCONE_THREADS", threads)
            .output()
            .unwrap()
    };
    assert!(run("1").status.success());
    assert_eq!(run("zero").status.code(), Some(1));
}
