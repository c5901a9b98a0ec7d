use std::path::Path;
use std::process::{Command, Output};

fn dnflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dnflow")).args(args).output().unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn theory_prints_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"N": 3, "p": 2, "m": 2, "alpha": 1}"#);
    let out = dnflow(&["theory", "--config", &cfg]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["flags"]["fsp"], true);
    assert!((v["rates"]["delta1"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn theory_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"N": 3, "p": 2, "m": 2}"#);
    let csv = dir.path().join("sweep.csv");
    let out = dnflow(&["theory", "--config", &cfg, "--csv", "--alphas", "0:3:0.5", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(dnflow(&["theory", "--config", &cfg, "--csv", "--alphas", "3:0:1"]).status.code() == Some(1));
}

#[test]
fn simulate_writes_series_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"N": 3, "p": 2, "m": 2, "r_max": 1000, "solver": {"grid": {"kind": "uniform", "cells": 64, "r_max": 8}}}"#,
    );
    let csv = dir.path().join("run.csv");
    let cp = dir.path().join("cp.json");
    let out = dnflow(&[
        "simulate", "--config", &cfg, "--t-end", "2", "--every", "0.5", "--out", csv.to_str().unwrap(),
        "--checkpoint", cp.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("t,sup,support_radius,mass,rmax"));
    assert_eq!(text.lines().count(), 6);
    let cp: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(cp).unwrap()).unwrap();
    assert_eq!(cp["time"], 2.0);
}

#[test]
fn experiment_writes_outputs_and_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"N": 3, "p": 2, "m": 2, "alpha": 0, "experiment": {"t_end": 1e4}}"#);
    let out_dir = dir.path().join("out");
    let out = dnflow(&["experiment", "fsp", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("PASS conservation")));
    assert!(out_dir.join("fsp.json").exists());
    assert!(out_dir.join("fsp.dat").exists());
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"N": 3, "p": 2, "m": 2, "alpha": 1}"#);
    let out = dnflow(&["experiment", "barenblatt", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = dnflow(&["theory", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = dnflow(&["experiment", "nope", "--config", &cfg, "--out", "x"]);
    assert!(!out.status.success());
}

#[test]
fn inequalities_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"N": 3, "p": 2, "m": 2, "alpha": 1}"#);
    let out = dnflow(&["inequalities", "--config", &cfg]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 10);
    assert!(!dnflow(&["inequalities", "--config", &cfg, "--family", "nope"]).status.success());
}
