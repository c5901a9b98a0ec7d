use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use dnflow_ffi::*;

const CONFIG: &str = r#"{"N": 3, "p": 2, "m": 2, "alpha": 1, "r_max": 1000}"#;

fn bundle() -> *mut DnflowBundle {
    let cfg = CString::new(CONFIG).unwrap();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { dnflow_bundle_new(cfg.as_ptr(), &mut b) }, DnflowStatus::Ok);
    assert!(!b.is_null());
    b
}

fn last_error() -> String {
    let p = dnflow_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn euclidean_ball_volume() {
    let b = bundle();
    let mut v = 0.0;
    assert_eq!(unsafe { dnflow_bundle_volume(b, 2.0, &mut v) }, DnflowStatus::Ok);
    let exact = 4.0 / 3.0 * std::f64::consts::PI * 8.0;
    assert!((v - exact).abs() < 1e-8 * exact);
    assert!(dnflow_last_error_message().is_null());
    let mut z = 0.0;
    let mut psi = 0.0;
    assert_eq!(unsafe { dnflow_bundle_psi(b, 3.0, &mut psi) }, DnflowStatus::Ok);
    assert_eq!(unsafe { dnflow_bundle_z_tilde(b, psi, &mut z) }, DnflowStatus::Ok);
    assert!((z - 3.0).abs() < 1e-7, "{z}");
    unsafe { dnflow_bundle_free(b) };
}

#[test]
fn errors_map_to_codes_and_messages() {
    let mut b = ptr::null_mut();
    let bad = CString::new(r#"{"N": 3, "p": 2}"#).unwrap();
    assert_eq!(unsafe { dnflow_bundle_new(bad.as_ptr(), &mut b) }, DnflowStatus::Json);
    assert!(b.is_null());
    assert!(last_error().contains("m"));

    let sub = CString::new(r#"{"N": 3, "p": 2, "m": -1}"#).unwrap();
    let status = unsafe { dnflow_bundle_new(sub.as_ptr(), &mut b) };
    assert_eq!(status, DnflowStatus::InvalidSpec);

    assert_eq!(unsafe { dnflow_bundle_new(ptr::null(), &mut b) }, DnflowStatus::NullPointer);
    let mut v = 0.0;
    assert_eq!(unsafe { dnflow_bundle_volume(ptr::null(), 1.0, &mut v) }, DnflowStatus::NullPointer);

    let b = bundle();
    assert_eq!(unsafe { dnflow_bundle_volume(b, 1e9, &mut v) }, DnflowStatus::Range);
    assert!(last_error().contains("outside"));
    let kind = CString::new("nope").unwrap();
    let cfg = CString::new(CONFIG).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { dnflow_experiment_run(kind.as_ptr(), cfg.as_ptr(), &mut out) },
        DnflowStatus::InvalidInput
    );
    let kind = CString::new("barenblatt").unwrap();
    assert_eq!(
        unsafe { dnflow_experiment_run(kind.as_ptr(), cfg.as_ptr(), &mut out) },
        DnflowStatus::InvalidExperiment
    );
    assert!(out.is_null());
    unsafe { dnflow_bundle_free(b) };
}

#[test]
fn simulation_conserves_mass_through_the_abi() {
    let b = bundle();
    let solver = CString::new(r#"{"grid": {"kind": "uniform", "cells": 64, "r_max": 8}}"#).unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(
        unsafe { dnflow_simulation_new(b, solver.as_ptr(), 1.0, 2.0, &mut sim) },
        DnflowStatus::Ok
    );
    let mut dt = 0.0;
    assert_eq!(unsafe { dnflow_simulation_step(sim, 1.0, &mut dt) }, DnflowStatus::Ok);
    assert!(dt > 0.0);
    assert_eq!(unsafe { dnflow_simulation_run(sim, 1.0) }, DnflowStatus::Ok);
    let mut o = DnflowObservation::default();
    assert_eq!(unsafe { dnflow_simulation_observe(sim, &mut o) }, DnflowStatus::Ok);
    assert_eq!(o.t, 1.0);
    assert!((o.mass - 2.0).abs() < 1e-12 * 2.0);

    let mut k = 0usize;
    let st = unsafe { dnflow_simulation_profile(sim, ptr::null_mut(), ptr::null_mut(), 0, &mut k) };
    assert_eq!(st, DnflowStatus::Ok);
    assert_eq!(k, 64);
    let mut small = vec![0.0; 10];
    let st = unsafe { dnflow_simulation_profile(sim, small.as_mut_ptr(), ptr::null_mut(), 10, &mut k) };
    assert_eq!(st, DnflowStatus::BufferTooSmall);
    let mut r = vec![0.0; k];
    let mut u = vec![0.0; k];
    let st = unsafe { dnflow_simulation_profile(sim, r.as_mut_ptr(), u.as_mut_ptr(), k, &mut k) };
    assert_eq!(st, DnflowStatus::Ok);
    assert!(r.windows(2).all(|w| w[1] > w[0]));
    assert!(u.iter().all(|&x| x >= 0.0));
    assert!((u.iter().copied().fold(0.0, f64::max) - o.sup).abs() == 0.0);
    unsafe {
        dnflow_simulation_free(sim);
        dnflow_bundle_free(b);
    }
}

#[test]
fn theory_json_round_trips() {
    let b = bundle();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { dnflow_theory_classify(b, &mut s) }, DnflowStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { dnflow_string_free(s) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["flags"]["fsp"], serde_json::Value::Bool(true));
    let mut d1 = 0.0;
    assert_eq!(unsafe { dnflow_theory_delta1(b, &mut d1) }, DnflowStatus::Ok);
    assert!((d1 - 2.0 / 3.0).abs() < 1e-12);
    let v = unsafe { CStr::from_ptr(dnflow_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    unsafe { dnflow_bundle_free(b) };
}

fn target_dir() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    exe.parent()?.parent().map(Path::to_path_buf)
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok()
}

#[test]
fn header_compiles_and_links_from_c() {
    if !have_cc() {
        eprintln!("cc not found; skipping the C build");
        return;
    }
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let include = root.join("include");
    assert!(include.join("dnflow.h").exists());
    let src = root.join("tests").join("c").join("smoke.c");
    let tmp = tempfile::tempdir().unwrap();
    let obj = tmp.path().join("smoke.o");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-c"])
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg("-o")
        .arg(&obj)
        .status()
        .unwrap();
    assert!(status.success(), "the generated header must compile as C99");

    let Some(lib) = target_dir().map(|d| d.join("libdnflow_ffi.a")).filter(|p| p.exists()) else {
        eprintln!("static library not built; compiled the header only");
        return;
    };
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(&obj)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<f64> = text.split_whitespace().map(|x| x.parse().unwrap()).collect();
    assert_eq!(fields[0], 0.5);
    assert!((fields[1] - 1.0).abs() < 1e-12);
}
