use std::f64::consts::PI;

use approx::assert_relative_eq;
use dnflow::inequalities::{
    equimeasurability_error, named_family, run_suite, verify_faber_krahn, verify_hardy, Bump, FamilySpec,
    InequalityId, Measure, RadialTestFunction, Status, SuiteSettings,
};
use dnflow::ProblemConfig;
use proptest::prelude::*;

fn nodes(radius: f64, segments: usize) -> Vec<f64> {
    (0..=segments).map(|i| radius * i as f64 / segments as f64).collect()
}

fn cone() -> RadialTestFunction {
    RadialTestFunction::from_fn(nodes(2.0, 200), |r| (1.0 - r).max(0.0)).unwrap()
}

#[test]
fn distribution_of_a_cone() {
    let b = ProblemConfig::euclidean(3, 2.0, 2.0, 0.0).bundle().unwrap();
    let mu = Measure::new(&b, &nodes(2.0, 200)).unwrap();
    let u = cone();
    for lambda in [0.0, 0.3, 0.8] {
        let exact = 4.0 * PI * (1.0f64 - lambda).powi(3) / 3.0;
        assert_relative_eq!(mu.distribution(&u, lambda).unwrap(), exact, max_relative = 1e-9);
    }
    // int (1-r)^2 dx = 4 pi / 30
    let l2 = mu.integrate(&u, |s| s.u * s.u).unwrap();
    assert_relative_eq!(l2, 4.0 * PI / 30.0, max_relative = 1e-9);
    assert!(equimeasurability_error(&mu, &u, 2.0).unwrap() < 1e-6);
}

#[test]
fn euclidean_constants_respect_the_sharp_values() {
    let b = ProblemConfig::euclidean(3, 2.0, 2.0, 0.0).bundle().unwrap();
    let spec = FamilySpec { count: 40, segments: 256, ..FamilySpec::default() };
    let family = spec.build().unwrap();
    let mu = Measure::new(&b, &spec.nodes()).unwrap();
    // Hardy: (p/(N-p))^p = 4
    let hardy = verify_hardy(&mu, &family, 2.0).unwrap();
    assert_eq!(hardy.status, Status::Passed);
    assert!(hardy.constant.unwrap() <= 4.0);
    // Faber-Krahn with rho = 1: 1/lambda_1(B_1) = 1/pi^2
    let fk = verify_faber_krahn(&mu, &family, 2.0, &[0.0, 0.5]).unwrap();
    assert!(fk.constant.unwrap() <= 1.0 / (PI * PI));
    assert!(fk.constant.unwrap() > 0.5 / (PI * PI));
}

#[test]
fn constants_are_invariant_under_amplitude_scaling() {
    let b = ProblemConfig::euclidean(3, 2.0, 2.0, 1.0).bundle().unwrap();
    let spec = FamilySpec { count: 10, segments: 128, ..FamilySpec::default() };
    let family = spec.build().unwrap();
    let scaled: Vec<_> = family.iter().map(|u| u.scaled(7.5)).collect();
    let mu = Measure::new(&b, &spec.nodes()).unwrap();
    let a = verify_hardy(&mu, &family, 2.0).unwrap().constant.unwrap();
    let c = verify_hardy(&mu, &scaled, 2.0).unwrap().constant.unwrap();
    assert_relative_eq!(a, c, max_relative = 1e-12);
}

fn suite(beta: f64, segments: usize) -> dnflow::inequalities::InequalityReport {
    let mut cfg = ProblemConfig::euclidean(3, 2.0, 2.0, 1.0);
    cfg.beta = beta;
    let b = cfg.bundle().unwrap();
    let settings = SuiteSettings {
        family: FamilySpec { count: 25, segments, ..FamilySpec::default() },
        ..SuiteSettings::default()
    };
    run_suite(&b, &settings).unwrap()
}

#[test]
fn suite_is_finite_and_grid_stable_on_both_geometries() {
    let ids = [InequalityId::Hardy, InequalityId::SobolevWeighted, InequalityId::FaberKrahn, InequalityId::Sgn];
    for beta in [1.0, 0.9] {
        let coarse = suite(beta, 256);
        let fine = suite(beta, 512);
        assert_eq!(coarse.records.len(), InequalityId::ALL.len());
        assert!(fine.equimeasurability <= 1e-6, "beta {beta}: {}", fine.equimeasurability);
        for id in ids {
            let a = coarse.get(id).unwrap();
            let b = fine.get(id).unwrap();
            assert_eq!(b.status, Status::Passed, "{id} on beta {beta}: {}", b.detail);
            assert!(b.preconditions_met);
            let (ca, cb) = (a.constant.unwrap(), b.constant.unwrap());
            assert!(cb.is_finite() && cb > 0.0);
            assert!((cb / ca - 1.0).abs() < 0.05, "{id} on beta {beta}: {ca} -> {cb}");
        }
    }
}

#[test]
fn report_serializes_with_snake_case_ids() {
    let rep = suite(1.0, 128);
    let json = serde_json::to_value(&rep).unwrap();
    let ids: Vec<&str> = json["records"].as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"faber_krahn_s"));
    assert!(ids.contains(&"sgns_w"));
}

#[test]
fn family_is_seeded_and_named() {
    let a = FamilySpec::default().bumps();
    let b = FamilySpec::default().bumps();
    assert_eq!(a, b);
    assert_eq!(a.len(), 100);
    let other = FamilySpec { seed: 1, ..FamilySpec::default() }.bumps();
    assert_ne!(a, other);
    assert_eq!(named_family("bumps100").unwrap(), FamilySpec::default());
    assert!(named_family("nope").is_err());
    assert!(FamilySpec { count: 0, ..FamilySpec::default() }.build().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn single_bumps_obey_the_sharp_hardy_bound(center in 0.0f64..4.0, width in 0.3f64..3.0, amp in 0.1f64..5.0) {
        let b = ProblemConfig::euclidean(3, 2.0, 2.0, 0.0).bundle().unwrap();
        let ns = nodes(10.0, 400);
        let bump = Bump { center, width, amplitude: amp };
        let u = RadialTestFunction::from_fn(ns.clone(), |r| bump.eval(r)).unwrap();
        let mu = Measure::new(&b, &ns).unwrap();
        let rec = verify_hardy(&mu, std::slice::from_ref(&u), 2.0).unwrap();
        prop_assert!(rec.constant.unwrap() <= 4.0);
        prop_assert!(equimeasurability_error(&mu, &u, 2.0).unwrap() < 1e-6);
    }
}
