use std::f64::consts::{E, PI};

use approx::assert_relative_eq;
use dnflow::geometry::sphere_area;
use dnflow::{Error, ProblemConfig};
use proptest::prelude::*;

fn euclid(alpha: f64) -> dnflow::geometry::GeometricBundle {
    ProblemConfig::euclidean(3, 2.0, 2.0, alpha).bundle().unwrap()
}

#[test]
fn sphere_areas_match_closed_forms() {
    assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-15);
    assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-15);
    assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-15);
    assert_relative_eq!(sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-15);
}

#[test]
fn euclidean_volumes_in_several_dimensions() {
    for n in 2..=5u32 {
        let b = ProblemConfig::euclidean(n, 2.0, 2.0, 0.0).bundle().unwrap();
        for r in [0.01f64, 0.7, 3.0, 50.0, 2000.0] {
            let exact = sphere_area(n) * r.powi(n as i32) / n as f64;
            assert_relative_eq!(b.volume(r).unwrap(), exact, max_relative = 1e-9);
        }
    }
}

#[test]
fn warped_volume_beyond_the_matching_point() {
    let beta: f64 = 0.9;
    let mut cfg = ProblemConfig::euclidean(3, 2.0, 2.0, 1.0);
    cfg.beta = beta;
    let b = cfg.bundle().unwrap();
    // f = C t on [0, e], t^beta beyond, C = e^{beta - 1}
    let c = E.powf(beta - 1.0);
    let inner = c * c * E.powi(3) / 3.0;
    for r in [5.0f64, 40.0, 900.0] {
        let outer = (r.powf(2.0 * beta + 1.0) - E.powf(2.0 * beta + 1.0)) / (2.0 * beta + 1.0);
        assert_relative_eq!(b.volume(r).unwrap(), 4.0 * PI * (inner + outer), max_relative = 1e-9);
    }
    assert_relative_eq!(b.volume(1.0).unwrap(), 4.0 * PI * c * c / 3.0, max_relative = 1e-9);
}

#[test]
fn weighted_volume_with_power_density() {
    let b = euclid(1.0);
    // rho = e^{-1} on [0, e], 1/r beyond
    for r in [10.0, 300.0] {
        let exact = 4.0 * PI * (E * E / 3.0 + (r * r - E * E) / 2.0);
        assert_relative_eq!(b.weighted_volume(r).unwrap(), exact, max_relative = 1e-9);
    }
    assert_relative_eq!(b.rho(1.0), 1.0 / E, max_relative = 1e-15);
    assert_relative_eq!(b.rho(20.0), 0.05, max_relative = 1e-15);
}

#[test]
fn psi_has_the_homogeneous_closed_form() {
    // q = 1 and rho = 1: psi = V(R) R^2 = (4 pi / 3) R^5
    let b = euclid(0.0);
    for r in [0.1f64, 2.0, 70.0] {
        assert_relative_eq!(b.psi(r).unwrap(), 4.0 * PI / 3.0 * r.powi(5), max_relative = 1e-9);
    }
    assert_eq!(b.psi(0.0).unwrap(), 0.0);
    assert_eq!(b.z_tilde(0.0).unwrap(), 0.0);
}

#[test]
fn out_of_range_arguments_are_errors() {
    let b = euclid(0.0);
    assert!(b.volume(-1.0).is_err());
    assert!(matches!(b.volume(1e9), Err(Error::Range { .. })));
    assert!(b.z_tilde(-1.0).is_err());
}

#[test]
fn decreasing_psi_is_not_inverted() {
    let b = euclid(3.0);
    assert!(!b.psi_is_monotone());
    assert!(matches!(b.z_tilde(1.0), Err(Error::Regime(_))));
}

#[test]
fn invalid_profiles_are_rejected() {
    let mut cfg = ProblemConfig::euclidean(3, 2.0, 2.0, 0.0);
    cfg.beta = 1.5;
    assert!(matches!(cfg.bundle(), Err(Error::InvalidSpec(_))));
    let mut cfg = ProblemConfig::euclidean(3, 2.0, 2.0, 0.0);
    cfg.a = 2.0;
    assert!(matches!(cfg.bundle(), Err(Error::InvalidSpec(_))));
    let cfg = ProblemConfig::euclidean(1, 2.0, 2.0, 0.0);
    assert!(cfg.bundle().is_err());
}

#[test]
fn csv_has_a_header_and_one_row_per_node() {
    let mut cfg = ProblemConfig::euclidean(3, 2.0, 2.0, 0.5);
    cfg.nodes = 64;
    let b = cfg.bundle().unwrap();
    let mut buf = Vec::new();
    b.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('r'));
    assert_eq!(lines.count(), 64);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn z_tilde_inverts_psi(log_r in -2.0f64..3.5, alpha in 0.0f64..2.4, beta in 0.85f64..=1.0) {
        let mut cfg = ProblemConfig::euclidean(3, 2.0, 2.0, alpha);
        cfg.beta = beta;
        let b = cfg.bundle().unwrap();
        let r = 10f64.powf(log_r);
        let back = b.z_tilde(b.psi(r).unwrap()).unwrap();
        prop_assert!((back / r - 1.0).abs() < 1e-7, "r {r} back {back}");
    }

    #[test]
    fn volume_inverse_round_trips(log_r in -2.0f64..3.9) {
        let b = euclid(0.0);
        let r = 10f64.powf(log_r);
        let back = b.inv_volume(b.volume(r).unwrap()).unwrap();
        prop_assert!((back / r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn shells_add_up(a in 0.0f64..50.0, w1 in 0.0f64..50.0, w2 in 0.0f64..50.0) {
        let b = euclid(1.0);
        let (m1, m2) = (a + w1, a + w1 + w2);
        let split = b.weighted_shell(a, m1).unwrap() + b.weighted_shell(m1, m2).unwrap();
        let whole = b.weighted_shell(a, m2).unwrap();
        prop_assert!((split - whole).abs() <= 1e-9 * whole.max(1e-300));
    }
}
