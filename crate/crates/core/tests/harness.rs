use dnflow::harness::{
    decade_slopes, fit_power_law, plot_data, run_experiment, write_outputs, ExperimentKind, ExperimentResult,
    ExperimentSettings, MIN_POINTS,
};
use dnflow::{Error, ProblemConfig};
use proptest::prelude::*;

fn geometric(t0: f64, t1: f64, n: usize, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let t = t0 * (t1 / t0).powf(i as f64 / (n - 1) as f64);
            (t, f(t))
        })
        .collect()
}

fn with_settings(mut cfg: ProblemConfig, settings: ExperimentSettings) -> ProblemConfig {
    cfg.experiment = Some(settings);
    cfg
}

#[test]
fn exact_power_law_is_recovered() {
    let series = geometric(1.0, 1e6, 61, |t| 3.0 * t.powf(-0.6));
    let fit = fit_power_law(&series, (1e4, 1e6)).unwrap();
    assert!((fit.exponent + 0.6).abs() < 1e-12);
    assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
    assert!((fit.r2 - 1.0).abs() < 1e-12);
    assert_eq!(fit.points, 21);
}

#[test]
fn oscillating_power_law_stays_within_the_perturbation() {
    // d/d ln t of ln(1 + 0.05 sin ln t) is bounded by 0.05/0.95
    let series = geometric(1.0, 1e6, 121, |t| t.powf(-2.0 / 3.0) * (1.0 + 0.05 * t.ln().sin()));
    let fit = fit_power_law(&series, (10f64.powf(4.5), 1e6)).unwrap();
    assert!((fit.exponent + 2.0 / 3.0).abs() < 0.053, "{}", fit.exponent);
    assert!(fit.r2 > 0.9);
}

#[test]
fn short_or_nonpositive_series_are_rejected() {
    let short = geometric(1.0, 10.0, MIN_POINTS - 1, |t| t);
    assert!(matches!(fit_power_law(&short, (1.0, 10.0)), Err(Error::Fit(_))));
    let mut bad = geometric(1.0, 10.0, 20, |t| t);
    bad[5].1 = 0.0;
    assert!(matches!(fit_power_law(&bad, (1.0, 10.0)), Err(Error::Fit(_))));
}

#[test]
fn decade_slopes_of_a_broken_power_law() {
    let series = geometric(1e-3, 1.0, 31, |t| if t < 0.01 { t } else { 0.01f64.powf(-1.0) * t * t });
    let s = decade_slopes(&series, 1.0, 3).unwrap();
    assert_eq!(s.len(), 3);
    assert!((s[0] - 1.0).abs() < 1e-9);
    assert!((s[2] - 2.0).abs() < 1e-9);
}

#[test]
fn equal_masses_give_identical_curves() {
    let settings = ExperimentSettings { masses: vec![1.0, 1.0], t_end: Some(1e3), ..Default::default() };
    let cfg = with_settings(ProblemConfig::euclidean(3, 2.0, 2.0, 2.6), settings);
    let res = run_experiment(ExperimentKind::Universal, &cfg).unwrap();
    assert_eq!(res.runs.len(), 2);
    assert_eq!(res.runs[0].series, res.runs[1].series);
    let again = run_experiment(ExperimentKind::Universal, &cfg).unwrap();
    assert_eq!(again.runs[0].series, res.runs[0].series);
    assert_eq!(again.provenance.config_hash, res.provenance.config_hash);
}

#[test]
fn decay_exponent_does_not_depend_on_mass() {
    let exps: Vec<f64> = [1.0, 10.0]
        .iter()
        .map(|&mass| {
            let settings = ExperimentSettings { mass, t_end: Some(1e5), ..Default::default() };
            let cfg = with_settings(ProblemConfig::euclidean(3, 2.0, 2.0, 0.0), settings);
            let res = run_experiment(ExperimentKind::Decay, &cfg).unwrap();
            res.fits.decay_exponent.unwrap()
        })
        .collect();
    assert!((exps[0] - exps[1]).abs() < 0.02, "{exps:?}");
}

#[test]
fn fsp_outputs_are_written_and_parse_back() {
    let settings = ExperimentSettings { t_end: Some(1e4), ..Default::default() };
    let cfg = with_settings(ProblemConfig::euclidean(3, 2.0, 2.0, 1.0), settings);
    let res = run_experiment(ExperimentKind::Fsp, &cfg).unwrap();
    assert!(res.verdict("support_rate").is_some());
    assert!(res.verdict("conservation").unwrap().passed);

    let dir = tempfile::tempdir().unwrap();
    let paths = write_outputs(&res, dir.path()).unwrap();
    assert_eq!(paths.len(), res.runs.len() + 2);
    let csv = std::fs::read_to_string(dir.path().join(format!("fsp_{}.csv", res.runs[0].label))).unwrap();
    assert!(csv.starts_with("t,sup,support_radius,mass,mass_in_unit_ball\n"));
    assert_eq!(csv.lines().count(), res.runs[0].series.len() + 1);

    let json = std::fs::read_to_string(dir.path().join("fsp.json")).unwrap();
    let back: ExperimentResult = serde_json::from_str(&json).unwrap();
    assert_eq!(back, res);

    let dat = std::fs::read_to_string(dir.path().join("fsp.dat")).unwrap();
    assert_eq!(dat, plot_data(&res));
    assert!(dat.contains("# reference (predicted rate): y = "));
    assert!(dat.contains("**(0.333"));
    let rows = dat.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
    for row in rows {
        let cols: Vec<f64> = row.split_whitespace().map(|x| x.parse().unwrap()).collect();
        assert_eq!(cols.len(), 2);
    }
}

#[test]
fn universal_plot_blocks_are_separated() {
    let settings = ExperimentSettings { t_end: Some(100.0), ..Default::default() };
    let cfg = with_settings(ProblemConfig::euclidean(3, 2.0, 2.0, 2.6), settings);
    let res = run_experiment(ExperimentKind::Universal, &cfg).unwrap();
    let dat = plot_data(&res);
    assert_eq!(dat.matches("\n\n\n").count(), 1);
    assert!(dat.contains("**(-1"));
}

#[test]
fn barenblatt_needs_the_flat_homogeneous_setting() {
    let mut cfg = ProblemConfig::euclidean(3, 2.0, 2.0, 0.0);
    cfg.beta = 0.9;
    assert!(matches!(run_experiment(ExperimentKind::Barenblatt, &cfg), Err(Error::InvalidExperiment(_))));
    let cfg = ProblemConfig::euclidean(3, 2.0, 2.0, 1.0);
    assert!(matches!(run_experiment(ExperimentKind::Barenblatt, &cfg), Err(Error::InvalidExperiment(_))));
}

#[test]
fn small_barenblatt_experiment_reports_its_errors() {
    let settings = ExperimentSettings { cells: 256, convergence_cells: 128, ..Default::default() };
    let cfg = with_settings(ProblemConfig::euclidean(3, 2.0, 2.0, 0.0), settings);
    let res = run_experiment(ExperimentKind::Barenblatt, &cfg).unwrap();
    for name in ["linf_error", "l1_error", "runtime", "convergence", "conservation"] {
        let v = res.verdict(name).unwrap();
        assert!(v.passed, "{name}: {}", v.detail);
    }
    let prof = res.profile.as_ref().unwrap();
    assert_eq!(prof.t, 2.0);
    assert_eq!(prof.rows.len(), 256);
    assert!(plot_data(&res).contains("# reference (exact profile)"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fits_recover_random_power_laws(e in -3.0f64..3.0, c in 1e-3f64..1e3) {
        let series = geometric(1e-2, 1e4, 40, |t| c * t.powf(e));
        let fit = fit_power_law(&series, (1e-2, 1e4)).unwrap();
        prop_assert!((fit.exponent - e).abs() < 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-8);
    }
}
