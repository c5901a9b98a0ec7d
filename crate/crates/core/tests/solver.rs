use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use dnflow::geometry::GeometricBundle;
use dnflow::solver::{
    write_series_csv, Barenblatt, GridSpec, ObservationSchedule, RadialState, Solver, SolverConfig, Stepping,
};
use dnflow::{Error, ProblemConfig};
use proptest::prelude::*;

fn bundle(p: f64, m: f64, alpha: f64, r_max: f64) -> Arc<GeometricBundle> {
    let mut cfg = ProblemConfig::euclidean(3, p, m, alpha);
    cfg.r_max = r_max;
    cfg.nodes = 512;
    Arc::new(cfg.bundle().unwrap())
}

fn rel_drift(m0: f64, m1: f64) -> f64 {
    (m1 - m0).abs() / m0
}

/// Residual of `u_t - r^{1-N} (r^{N-1} u^{m-1} u_r)_r` by central differences.
fn barenblatt_residual(b: &Barenblatt, n: f64, m: f64, r: f64, t: f64) -> (f64, f64) {
    let h = 1e-4 * r.max(0.1);
    let ht = 1e-5 * t;
    let flux = |x: f64| {
        let ur = (b.value(x + h, t) - b.value(x - h, t)) / (2.0 * h);
        x.powf(n - 1.0) * b.value(x, t).powf(m - 1.0) * ur
    };
    let div = (flux(r + h) - flux(r - h)) / (2.0 * h) / r.powf(n - 1.0);
    let ut = (b.value(r, t + ht) - b.value(r, t - ht)) / (2.0 * ht);
    (ut - div, ut.abs().max(div.abs()))
}

#[test]
fn barenblatt_profile_solves_the_equation() {
    for (dim, m) in [(3u32, 2.0), (2, 3.0), (3, 1.5)] {
        let b = Barenblatt::new(dim, m, 1.7).unwrap();
        let t = 1.5;
        let front = b.front(t);
        for frac in [0.1, 0.3, 0.5, 0.7, 0.85] {
            let (res, scale) = barenblatt_residual(&b, dim as f64, m, frac * front, t);
            assert!(res.abs() < 1e-5 * scale, "N {dim} m {m} r/front {frac}: residual {res:e}");
        }
        assert_eq!(b.value(1.01 * front, t), 0.0);
    }
}

#[test]
fn barenblatt_carries_its_mass() {
    let b = Barenblatt::new(3, 2.0, 2.5).unwrap();
    for t in [1.0, 7.0] {
        let front = b.front(t);
        let n = 20_000;
        let h = front / n as f64;
        // composite midpoint rule for int 4 pi r^2 u dr
        let mass: f64 = (0..n)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                4.0 * PI * r * r * b.value(r, t) * h
            })
            .sum();
        assert_relative_eq!(mass, 2.5, max_relative = 1e-6);
    }
    assert_relative_eq!(b.k(), 0.6, max_relative = 1e-15);
}

#[test]
fn solver_tracks_barenblatt_on_a_coarse_grid() {
    let bun = bundle(2.0, 2.0, 0.0, 100.0);
    let bb = Barenblatt::new(3, 2.0, 1.0).unwrap();
    let mut s = Solver::new(bun, SolverConfig::uniform(256, 1.5 * bb.front(2.0))).unwrap();
    let u0 = bb.cell_averages(s.grid(), 1.0).unwrap();
    let mut st = s.state_from_cells(1.0, u0).unwrap();
    s.run(&mut st, 2.0, ObservationSchedule::Linear { every: 0.5 }).unwrap();
    let exact = bb.cell_averages(s.grid(), 2.0).unwrap();
    let sup = exact.iter().copied().fold(0.0, f64::max);
    let linf = st.u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / sup;
    assert!(linf < 0.01, "relative L-infinity error {linf}");
    assert!((st.support_radius - bb.front(2.0)).abs() < 0.05 * bb.front(2.0));
}

#[test]
fn explicit_runs_conserve_mass_and_stay_nonnegative() {
    for (p, m, alpha) in [(2.0, 2.0, 0.0), (2.0, 2.0, 1.5), (3.0, 1.0, 0.0), (2.5, 1.5, 0.5)] {
        let bun = bundle(p, m, alpha, 1e3);
        let mut s = Solver::new(bun, SolverConfig::uniform(128, 8.0)).unwrap();
        let mut st = s.init_bump(1.0, 3.0).unwrap();
        let m0 = st.mass;
        assert_relative_eq!(m0, 3.0, max_relative = 1e-12);
        let series = s.run(&mut st, 5.0, ObservationSchedule::Geometric { per_decade: 5 }).unwrap();
        assert!(series.steps > 100);
        assert!(st.u.iter().all(|&v| v >= 0.0));
        assert!(s.stats().worst_undershoot >= -1e-12);
        for o in &series.observations {
            assert!(rel_drift(m0, o.mass) < 1e-12, "p {p} m {m} alpha {alpha}: drift {}", rel_drift(m0, o.mass));
        }
        let sups: Vec<f64> = series.observations.iter().map(|o| o.sup).collect();
        assert!(sups.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
}

#[test]
fn implicit_and_explicit_schemes_agree() {
    let bun = bundle(2.0, 2.0, 1.0, 1e3);
    let run = |stepping| {
        let mut cfg = SolverConfig::uniform(128, 12.0);
        cfg.stepping = stepping;
        let mut s = Solver::new(bun.clone(), cfg).unwrap();
        let mut st = s.init_bump(1.0, 1.0).unwrap();
        let m0 = st.mass;
        let series = s.run(&mut st, 20.0, ObservationSchedule::Linear { every: 20.0 }).unwrap();
        assert!(rel_drift(m0, st.mass) < 1e-12);
        assert!(st.u.iter().all(|&v| v >= 0.0));
        (st, series.steps)
    };
    let (ex, n_ex) = run(Stepping::Explicit);
    let (im, n_im) = run(Stepping::implicit(0.01));
    assert!(n_im < n_ex / 2, "implicit {n_im} steps vs explicit {n_ex}");
    assert!((im.sup / ex.sup - 1.0).abs() < 0.02, "{} vs {}", im.sup, ex.sup);
    let diff = im.u.iter().zip(&ex.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 0.02 * ex.sup);
}

#[test]
fn implicit_stepping_needs_a_convex_power() {
    // p = 3, m = 1/2: (p + m - 2)/(p - 1) = 3/4
    let bun = bundle(3.0, 0.5, 0.0, 1e3);
    let mut cfg = SolverConfig::uniform(64, 8.0);
    cfg.stepping = Stepping::implicit(0.01);
    assert!(matches!(Solver::new(bun, cfg), Err(Error::InvalidInput(_))));
}

#[test]
fn doubling_the_domain_does_not_change_an_interior_solution() {
    let bun = bundle(2.0, 2.0, 0.5, 1e3);
    let run = |cells: usize, r_max: f64| {
        let mut cfg = SolverConfig::uniform(cells, r_max);
        cfg.auto_extend = false;
        let mut s = Solver::new(bun.clone(), cfg).unwrap();
        let mut st = s.init_bump(1.0, 1.0).unwrap();
        let series = s.run(&mut st, 3.0, ObservationSchedule::Linear { every: 1.0 }).unwrap();
        assert!(!series.truncated);
        st
    };
    let a = run(96, 8.0);
    let b = run(192, 16.0);
    assert!(a.support_radius < 6.0);
    let diff = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-6 * a.sup, "max difference {diff:e}");
    assert!(b.u[96..].iter().all(|&v| v == 0.0));
}

#[test]
fn auto_extension_keeps_the_mass() {
    let bun = bundle(2.0, 2.0, 0.0, 1e4);
    let mut s = Solver::new(bun, SolverConfig::uniform(32, 2.0)).unwrap();
    let mut st = s.init_bump(0.4, 1.0).unwrap();
    let m0 = st.mass;
    let series = s.run(&mut st, 1e3, ObservationSchedule::Geometric { per_decade: 4 }).unwrap();
    assert!(series.extensions >= 1);
    assert!(!series.truncated);
    assert!(s.grid().r_max() > 2.0);
    assert!(rel_drift(m0, st.mass) < 1e-12);
}

#[test]
fn truncation_is_reported() {
    let bun = bundle(2.0, 2.0, 0.0, 1e3);
    let mut cfg = SolverConfig::uniform(32, 4.0);
    cfg.auto_extend = false;
    let mut s = Solver::new(bun, cfg).unwrap();
    let mut st = s.init_bump(0.9, 1.0).unwrap();
    let series = s.run(&mut st, 100.0, ObservationSchedule::Linear { every: 50.0 }).unwrap();
    assert!(series.truncated);
    assert!(series.warnings.iter().any(|w| w.contains("R_max")));
}

#[test]
fn checkpoints_resume_bit_for_bit() {
    let bun = bundle(2.0, 2.0, 1.0, 1e3);
    let cfg = SolverConfig::uniform(64, 8.0);
    let mut s = Solver::new(bun.clone(), cfg.clone()).unwrap();
    let mut st = s.init_bump(1.0, 1.0).unwrap();
    s.run(&mut st, 1.0, ObservationSchedule::Linear { every: 1.0 }).unwrap();
    let text = serde_json::to_string(&s.checkpoint(&st)).unwrap();
    s.run(&mut st, 2.0, ObservationSchedule::Linear { every: 1.0 }).unwrap();

    let (mut s2, mut st2) = Solver::restore(bun, cfg, &serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(st2.time, 1.0);
    s2.run(&mut st2, 2.0, ObservationSchedule::Linear { every: 1.0 }).unwrap();
    assert_eq!(st.u, st2.u);
    assert_eq!(s.stats().steps, s2.stats().steps);
}

#[test]
fn ball_mass_is_a_fraction_of_the_total() {
    let bun = bundle(2.0, 2.0, 0.0, 1e3);
    let mut s = Solver::new(bun.clone(), SolverConfig::uniform(64, 8.0)).unwrap();
    s.track_ball(1.0).unwrap();
    let st = s.init_bump(0.5, 1.0).unwrap();
    assert_relative_eq!(s.mass_in_ball(&st).unwrap(), 1.0, max_relative = 1e-12);
    let st = s.init_bump(1.5, 1.0).unwrap();
    let inside = s.mass_in_ball(&st).unwrap();
    // int_0^1 (1 - r^2/2.25)^2 r^2 dr / int_0^1.5 (...)
    let f = |r: f64| (1.0 - r * r / 2.25f64).powi(2) * r * r;
    let quad = |a: f64, b: f64| {
        let n = 4000;
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h) * h).sum::<f64>()
    };
    assert_relative_eq!(inside, quad(0.0, 1.0) / quad(0.0, 1.5), max_relative = 1e-3);
}

#[test]
fn invalid_inputs_are_rejected() {
    let bun = bundle(2.0, 2.0, 0.0, 1e3);
    let s = Solver::new(bun.clone(), SolverConfig::uniform(64, 8.0)).unwrap();
    assert!(s.init_bump(3.0, 1.0).is_err());
    assert!(s.init_bump(1.0, -1.0).is_err());
    assert!(s.state_from_cells(0.0, vec![0.0; 3]).is_err());
    assert!(s.state_from_cells(0.0, vec![-1.0; 64]).is_err());
    let mut cfg = SolverConfig::uniform(64, 8.0);
    cfg.cfl = 1.5;
    assert!(Solver::new(bun.clone(), cfg).is_err());
    let sub = bundle(2.0, 1.0, 0.0, 1e3);
    assert!(matches!(Solver::new(sub, SolverConfig::uniform(64, 8.0)), Err(Error::InvalidSpec(_))));
    let cfg: SolverConfig =
        serde_json::from_str(r#"{"grid": {"kind": "stretched", "core_cells": 16, "core_radius": 2, "growth": 0.1, "r_max": 100}}"#)
            .unwrap();
    let s = Solver::new(bun, cfg).unwrap();
    assert!(s.grid().edges().windows(2).all(|w| w[1] > w[0]));
    assert!(matches!(s.config().grid, GridSpec::Stretched { .. }));
}

#[test]
fn series_csv_round_trips_the_observations() {
    let bun = bundle(2.0, 2.0, 0.0, 1e3);
    let mut s = Solver::new(bun, SolverConfig::uniform(64, 8.0)).unwrap();
    let mut st = s.init_bump(1.0, 1.0).unwrap();
    let series = s.run(&mut st, 1.0, ObservationSchedule::Linear { every: 0.25 }).unwrap();
    let mut buf = Vec::new();
    write_series_csv(&series.observations, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    let t: f64 = rows[3].split(',').next().unwrap().parse().unwrap();
    assert_eq!(t, 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scheme_invariants(alpha in 0.0f64..2.0, m in 1.5f64..3.0, r0 in 0.3f64..1.5, mass in 0.1f64..20.0) {
        let bun = bundle(2.0, m, alpha, 1e3);
        let mut s = Solver::new(bun, SolverConfig::uniform(64, 8.0)).unwrap();
        let mut st: RadialState = s.init_bump(r0, mass).unwrap();
        let m0 = st.mass;
        let mut prev_sup = st.sup;
        let mut prev_support = st.support_radius;
        for _ in 0..400 {
            s.step(&mut st, f64::INFINITY).unwrap();
            prop_assert!(st.u.iter().all(|&v| v >= 0.0));
            prop_assert!(st.sup <= prev_sup * (1.0 + 1e-12));
            prop_assert!(st.support_radius >= prev_support);
            prev_sup = st.sup;
            prev_support = st.support_radius;
        }
        prop_assert!(rel_drift(m0, st.mass) < 1e-13);
        prop_assert!(s.stats().worst_undershoot >= -1e-12);
    }
}
