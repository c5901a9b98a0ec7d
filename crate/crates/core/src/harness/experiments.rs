use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::{
    config_hash, decade_slopes, fit_power_law, version_string, ExperimentKind, ExperimentResult, ExperimentSettings,
    Fits, ProfileComparison, Provenance, RunRecord, SeriesPoint, Verdict, FIT_DECADES, MIN_POINTS,
};
use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::geometry::GeometricBundle;
use crate::solver::{Barenblatt, GridSpec, Observation, ObservationSchedule, Solver, SolverConfig, Stepping};
use crate::theory::{classify, fsp_radius, predicted_rates, sup_bound_curve, PowerLogParams};

/// Relative slack when checking that a fitted envelope dominates the data.
const ENVELOPE_SLACK: f64 = 1e-9;

fn settings_of(spec: &ProblemConfig) -> ExperimentSettings {
    spec.experiment.clone().unwrap_or_default()
}

fn build_bundle(spec: &ProblemConfig, kind: ExperimentKind, settings: &ExperimentSettings) -> Result<Arc<GeometricBundle>> {
    let mut cfg = spec.clone();
    cfg.r_max = cfg.r_max.max(settings.domain_for(kind));
    Ok(Arc::new(cfg.bundle()?))
}

/// Explicit uniform grids with auto-extension for the finite-propagation regime,
/// implicit stretched grids reaching the tabulation edge for fast far fields.
fn solver_config(kind: ExperimentKind, spec: &ProblemConfig, settings: &ExperimentSettings, r_max: f64) -> SolverConfig {
    if let Some(sc) = &spec.solver {
        return sc.clone();
    }
    let r0 = settings.r0_for(kind);
    match kind {
        ExperimentKind::Universal | ExperimentKind::Blowup => SolverConfig {
            grid: GridSpec::Stretched {
                core_cells: 64,
                core_radius: 8.0 * r0,
                growth: 0.02,
                r_max,
            },
            auto_extend: false,
            r_max_limit: r_max,
            stepping: Stepping::implicit(0.02),
            ..SolverConfig::default()
        },
        _ => SolverConfig {
            r_max_limit: r_max,
            ..SolverConfig::uniform(256, 8.0 * r0)
        },
    }
}

fn point(o: &Observation) -> SeriesPoint {
    SeriesPoint {
        t: o.t,
        sup: o.sup,
        support_radius: o.support_radius,
        mass: o.mass,
        mass_in_unit_ball: o.mass_in_ball.unwrap_or(0.0),
    }
}

fn fit_series(series: &[SeriesPoint], t_end: f64, warnings: &mut Vec<String>) -> Fits {
    // widen to the last observation at or before t_end / 10^1.5 so the window spans the full 1.5 decades
    let nominal = t_end / 10f64.powf(FIT_DECADES);
    let lo = series
        .iter()
        .map(|s| s.t)
        .filter(|&t| t > 0.0 && t <= nominal * (1.0 + 1e-12))
        .fold(nominal, |_, t| t);
    let window = (lo, t_end);
    let inside: Vec<f64> = series
        .iter()
        .map(|s| s.t)
        .filter(|&t| t > 0.0 && t >= lo)
        .collect();
    let span = match (inside.first(), inside.last()) {
        (Some(a), Some(b)) => (b / a).log10(),
        _ => 0.0,
    };
    if inside.len() < MIN_POINTS || span < FIT_DECADES - 1e-9 {
        warnings.push(format!(
            "no fits: {} points spanning {span:.2} decades in the last {FIT_DECADES} decades",
            inside.len()
        ));
        return Fits::default();
    }
    let mut fits = Fits {
        window: Some(window),
        ..Fits::default()
    };
    let sup: Vec<(f64, f64)> = series.iter().map(|s| (s.t, s.sup)).collect();
    match fit_power_law(&sup, window) {
        Ok(f) => {
            fits.decay_exponent = Some(f.exponent);
            fits.decay_intercept = Some(f.intercept);
            fits.decay_r2 = Some(f.r2);
        }
        Err(e) => warnings.push(format!("sup fit: {e}")),
    }
    let supp: Vec<(f64, f64)> = series.iter().map(|s| (s.t, s.support_radius)).collect();
    match fit_power_law(&supp, window) {
        Ok(f) => {
            fits.support_exponent = Some(f.exponent);
            fits.support_intercept = Some(f.intercept);
            fits.support_r2 = Some(f.r2);
        }
        Err(e) => warnings.push(format!("support fit: {e}")),
    }
    fits
}

/// Marches `state` to `t_end` and packages the observations.
fn record(
    solver: &mut Solver,
    state: &mut crate::solver::RadialState,
    t_end: f64,
    schedule: ObservationSchedule,
    label: String,
    mass: f64,
) -> Result<RunRecord> {
    let first = solver.observe(state);
    let run = solver.run(state, t_end, schedule)?;
    let mut obs = vec![first];
    obs.extend(run.observations.iter().copied());
    let m0 = first.mass;
    let mass_drift = obs
        .iter()
        .filter(|o| o.support_radius < o.r_max)
        .map(|o| (o.mass - m0).abs() / m0)
        .fold(0.0, f64::max);
    let series: Vec<SeriesPoint> = obs.iter().map(point).collect();
    let mut warnings = run.warnings.clone();
    let fits = fit_series(&series, t_end, &mut warnings);
    let stats = solver.stats();
    Ok(RunRecord {
        label,
        mass,
        series,
        fits,
        steps: stats.steps,
        extensions: stats.extensions,
        truncated: stats.truncated,
        worst_undershoot: stats.worst_undershoot,
        mass_drift,
        warnings,
    })
}

fn simulate(
    bundle: &Arc<GeometricBundle>,
    config: &SolverConfig,
    settings: &ExperimentSettings,
    kind: ExperimentKind,
    mass: f64,
    label: String,
) -> Result<RunRecord> {
    let mut solver = Solver::new(bundle.clone(), config.clone())?;
    solver.track_ball(settings.ball_radius)?;
    let mut state = solver.init_bump(settings.r0_for(kind), mass)?;
    let schedule = ObservationSchedule::Geometric {
        per_decade: settings.per_decade,
    };
    record(&mut solver, &mut state, settings.t_end_for(kind), schedule, label, mass)
}

fn rate_verdict(name: String, measured: Option<f64>, target: f64, rel: f64) -> Verdict {
    let tolerance = rel * target.abs();
    let passed = measured.is_some_and(|m| (m - target).abs() <= tolerance);
    Verdict {
        name,
        passed,
        measured,
        target,
        tolerance,
        detail: match measured {
            Some(m) => format!("fitted {m:.5} against {target:.5} +/- {tolerance:.5}"),
            None => "no fit available".into(),
        },
    }
}

/// Mass drift per 10^6 steps over interior-support observations, and undershoot before clamping.
fn conservation_verdict(runs: &[RunRecord], settings: &ExperimentSettings) -> Verdict {
    let tol = &settings.tolerances;
    let drift = runs
        .iter()
        .map(|r| r.mass_drift / (r.steps as f64 / 1e6).max(1.0))
        .fold(0.0, f64::max);
    let under = runs.iter().map(|r| r.worst_undershoot).fold(0.0, f64::min);
    Verdict {
        name: "conservation".into(),
        passed: drift <= tol.conservation && under >= -tol.undershoot,
        measured: Some(drift),
        target: 0.0,
        tolerance: tol.conservation,
        detail: format!("relative mass drift per 1e6 steps {drift:.3e}; worst undershoot {under:.3e} of sup"),
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    kind: ExperimentKind,
    spec: &ProblemConfig,
    settings: ExperimentSettings,
    runs: Vec<RunRecord>,
    verdicts: Vec<Verdict>,
    constants: BTreeMap<String, f64>,
    proxy: Option<String>,
    mut warnings: Vec<String>,
    profile: Option<ProfileComparison>,
    start: Instant,
) -> Result<ExperimentResult> {
    for r in &runs {
        warnings.extend(r.warnings.iter().map(|w| format!("{}: {w}", r.label)));
    }
    let config_hash = config_hash(kind, spec, &settings)?;
    Ok(ExperimentResult {
        kind,
        spec: spec.clone(),
        fits: runs.first().map(|r| r.fits).unwrap_or_default(),
        passed: verdicts.iter().all(|v| v.passed),
        settings,
        runs,
        verdicts,
        constants,
        proxy,
        warnings,
        profile,
        provenance: Provenance {
            config_hash,
            version: version_string(),
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    })
}

/// Largest `gamma0` for which `M / V_rho(Z(gamma0 t M^q))` stays above the measured sup.
fn fit_gamma0(bundle: &GeometricBundle, mass: f64, series: &[SeriesPoint]) -> Result<f64> {
    let q = bundle.exponents().q();
    let mut best = f64::INFINITY;
    for s in series.iter().filter(|s| s.t > 0.0 && s.sup > 0.0) {
        let r = bundle.inv_vol_rho(mass / s.sup)?;
        best = best.min(bundle.psi(r)? / (s.t * mass.powf(q)));
    }
    if !(best.is_finite() && best > 0.0) {
        return Err(Error::Fit(format!("no positive gamma0 (got {best})")));
    }
    Ok(best * (1.0 - ENVELOPE_SLACK))
}

/// Smallest `gamma` for which `4 R0 + Z(gamma t M^q)` stays above the measured support.
fn fit_gamma(bundle: &GeometricBundle, mass: f64, r0: f64, series: &[SeriesPoint]) -> Result<f64> {
    let q = bundle.exponents().q();
    let mut best = 0.0f64;
    for s in series.iter().filter(|s| s.t > 0.0) {
        let excess = s.support_radius - 4.0 * r0;
        if excess > 0.0 {
            best = best.max(bundle.psi(excess)? / (s.t * mass.powf(q)));
        }
    }
    Ok(best * (1.0 + ENVELOPE_SLACK))
}

/// Sup decay rate against `-delta1`, with a fitted `gamma0` for the sup bound curve.
pub fn experiment_decay(spec: &ProblemConfig) -> Result<ExperimentResult> {
    let kind = ExperimentKind::Decay;
    let start = Instant::now();
    let settings = settings_of(spec);
    let bundle = build_bundle(spec, kind, &settings)?;
    let report = classify(&bundle)?;
    let rates = predicted_rates(&bundle)?;
    let mut warnings = Vec::new();
    if !report.flags.sup_estimate {
        warnings.push("sup_estimate is not established for this configuration; the fit is reported regardless".into());
    }
    let config = solver_config(kind, spec, &settings, bundle.r_max());
    let run = simulate(&bundle, &config, &settings, kind, settings.mass, format!("m{}", settings.mass))?;

    let mut constants = BTreeMap::new();
    constants.insert("delta1".into(), rates.delta1);
    if let Some(d2) = rates.delta2 {
        constants.insert("delta2".into(), d2);
    }
    let mut verdicts = vec![rate_verdict(
        "decay_rate".into(),
        run.fits.decay_exponent,
        -rates.delta1,
        settings.tolerances.rate,
    )];
    match fit_gamma0(&bundle, settings.mass, &run.series) {
        Ok(g0) => {
            constants.insert("gamma0".into(), g0);
            let times: Vec<f64> = run.series.iter().filter(|s| s.t > 0.0).map(|s| s.t).collect();
            let bound = sup_bound_curve(&bundle, settings.mass, &times, g0)?;
            let worst = run
                .series
                .iter()
                .filter(|s| s.t > 0.0)
                .zip(&bound)
                .map(|(s, b)| b / s.sup)
                .fold(f64::INFINITY, f64::min);
            verdicts.push(Verdict {
                name: "sup_bound_dominates".into(),
                passed: worst >= 1.0 - 1e-6,
                measured: Some(worst),
                target: 1.0,
                tolerance: 1e-6,
                detail: format!("min bound/sup = {worst:.6} with gamma0 = {g0:.6e}"),
            });
        }
        Err(e) => {
            warnings.push(format!("gamma0 fit failed: {e}"));
            verdicts.push(Verdict {
                name: "sup_bound_dominates".into(),
                passed: false,
                measured: None,
                target: 1.0,
                tolerance: 1e-6,
                detail: e.to_string(),
            });
        }
    }
    verdicts.push(conservation_verdict(std::slice::from_ref(&run), &settings));
    finish(kind, spec, settings, vec![run], verdicts, constants, None, warnings, None, start)
}

/// Predicted log-slope of the support: `1/lambda` for the built-in family,
/// otherwise the least-squares slope of `Z` over the fit window.
fn predicted_support_exponent(bundle: &GeometricBundle, window: (f64, f64)) -> Result<f64> {
    if let Some(pl) = PowerLogParams::from_bundle(bundle) {
        return Ok(1.0 / pl.lambda());
    }
    let k = 16;
    let pts: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let t = window.0 * (window.1 / window.0).powf(i as f64 / (k - 1) as f64);
            bundle.z_tilde(t).map(|z| (t, z))
        })
        .collect::<Result<_>>()?;
    Ok(fit_power_law(&pts, window)?.exponent)
}

/// Support growth rate and the finite-propagation envelope.
pub fn experiment_fsp(spec: &ProblemConfig) -> Result<ExperimentResult> {
    let kind = ExperimentKind::Fsp;
    let start = Instant::now();
    let settings = settings_of(spec);
    let bundle = build_bundle(spec, kind, &settings)?;
    let report = classify(&bundle)?;
    let mut warnings = Vec::new();
    if !report.flags.fsp {
        warnings.push("fsp is not established for this configuration; the fit is reported regardless".into());
    }
    let config = solver_config(kind, spec, &settings, bundle.r_max());
    let run = simulate(&bundle, &config, &settings, kind, settings.mass, format!("m{}", settings.mass))?;
    if run.truncated {
        return Err(Error::InvalidExperiment(
            "the support reached the outer boundary; enlarge the domain or enable auto_extend".into(),
        ));
    }
    let t_end = settings.t_end_for(kind);
    let window = (t_end / 10f64.powf(FIT_DECADES), t_end);
    let target = predicted_support_exponent(&bundle, window)?;
    let mut constants = BTreeMap::new();
    constants.insert("support_exponent_predicted".into(), target);
    let mut verdicts = vec![rate_verdict(
        "support_rate".into(),
        run.fits.support_exponent,
        target,
        settings.tolerances.rate,
    )];
    let r0 = settings.r0_for(kind);
    let gamma = fit_gamma(&bundle, settings.mass, r0, &run.series)?;
    constants.insert("gamma".into(), gamma);
    let mut worst = f64::INFINITY;
    for s in run.series.iter().filter(|s| s.t > 0.0) {
        let env = fsp_radius(&bundle, settings.mass, r0, s.t, gamma)?;
        worst = worst.min(env / s.support_radius);
    }
    verdicts.push(Verdict {
        name: "fsp_envelope".into(),
        passed: gamma.is_finite() && worst >= 1.0 - 1e-6,
        measured: Some(worst),
        target: 1.0,
        tolerance: 1e-6,
        detail: format!("min envelope/support = {worst:.6} with gamma = {gamma:.6e}"),
    });
    verdicts.push(conservation_verdict(std::slice::from_ref(&run), &settings));
    finish(kind, spec, settings, vec![run], verdicts, constants, None, warnings, None, start)
}

/// Largest relative gap `|a - b| / min(a, b)` between two sup curves for `t >= t_from`.
fn collapse_gap(a: &RunRecord, b: &RunRecord, t_from: f64) -> Result<f64> {
    if a.series.len() != b.series.len() {
        return Err(Error::Numeric("runs observed at different times".into()));
    }
    Ok(a.series
        .iter()
        .zip(&b.series)
        .filter(|(x, _)| x.t >= t_from * (1.0 - 1e-12))
        .map(|(x, y)| (x.sup - y.sup).abs() / x.sup.min(y.sup))
        .fold(0.0, f64::max))
}

/// Mass independence of the sup decay, one parallel run per mass.
pub fn experiment_universal(spec: &ProblemConfig, masses: &[f64]) -> Result<ExperimentResult> {
    let kind = ExperimentKind::Universal;
    let start = Instant::now();
    let mut settings = settings_of(spec);
    settings.masses = masses.to_vec();
    if masses.len() < 2 || masses.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::InvalidInput(format!("need at least two positive masses, got {masses:?}")));
    }
    let bundle = build_bundle(spec, kind, &settings)?;
    let report = classify(&bundle)?;
    let mut warnings = Vec::new();
    if !report.flags.universal_bound {
        warnings.push("universal_bound is not established for this configuration (negative control)".into());
    }
    let lo = masses.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = masses.iter().copied().fold(0.0, f64::max);
    if hi < 10.0 * lo {
        warnings.push(format!("masses span {:.2}x, less than 10x", hi / lo));
    }
    let config = solver_config(kind, spec, &settings, bundle.r_max());
    let runs: Vec<RunRecord> = masses
        .par_iter()
        .enumerate()
        .map(|(i, &m)| simulate(&bundle, &config, &settings, kind, m, format!("run{i}_m{m}")))
        .collect::<Result<_>>()?;

    let q = bundle.exponents().q();
    let target = -1.0 / q;
    let mut constants = BTreeMap::new();
    constants.insert("exponent_predicted".into(), target);
    let mut verdicts: Vec<Verdict> = runs
        .iter()
        .map(|r| rate_verdict(format!("exponent_{}", r.label), r.fits.decay_exponent, target, settings.tolerances.rate))
        .collect();
    let t_end = settings.t_end_for(kind);
    let i_lo = masses.iter().position(|&m| m == lo).unwrap_or(0);
    let i_hi = masses.iter().rposition(|&m| m == hi).unwrap_or(masses.len() - 1);
    let gap = collapse_gap(&runs[i_lo], &runs[i_hi], t_end / 10.0)?;
    verdicts.push(Verdict {
        name: "collapse".into(),
        passed: gap <= settings.tolerances.collapse,
        measured: Some(gap),
        target: 0.0,
        tolerance: settings.tolerances.collapse,
        detail: format!("largest relative sup gap between masses {lo} and {hi} over the last decade: {gap:.4}"),
    });
    let gamma = runs
        .iter()
        .flat_map(|r| r.series.iter().filter(|s| s.t >= t_end / 10f64.powf(FIT_DECADES)))
        .map(|s| s.sup * s.t.powf(1.0 / q))
        .fold(0.0, f64::max);
    constants.insert("gamma_fitted".into(), gamma);
    verdicts.push(conservation_verdict(&runs, &settings));
    finish(kind, spec, settings, runs, verdicts, constants, None, warnings, None, start)
}

/// Interface blow-up proxy: mass escape from `B_R0` and super-predicted front growth.
pub fn experiment_blowup(spec: &ProblemConfig) -> Result<ExperimentResult> {
    let kind = ExperimentKind::Blowup;
    let start = Instant::now();
    let settings = settings_of(spec);
    let bundle = build_bundle(spec, kind, &settings)?;
    let report = classify(&bundle)?;
    let mut warnings = Vec::new();
    if !report.flags.interface_blowup {
        warnings.push("interface_blowup is not established for this configuration (negative control)".into());
    }
    let config = solver_config(kind, spec, &settings, bundle.r_max());
    let run = simulate(&bundle, &config, &settings, kind, settings.mass, format!("m{}", settings.mass))?;
    let tol = &settings.tolerances;
    let t_end = settings.t_end_for(kind);
    let mut constants = BTreeMap::new();
    if let Some(a) = report.alpha_star {
        constants.insert("alpha_star".into(), a);
    }

    let b0 = run.series[0].mass_in_unit_ball;
    let b1 = run.series.last().map_or(b0, |s| s.mass_in_unit_ball);
    let kept = b1 / b0;
    let mut verdicts = vec![Verdict {
        name: "mass_escape".into(),
        passed: kept <= 1.0 - tol.mass_escape,
        measured: Some(kept),
        target: 1.0 - tol.mass_escape,
        tolerance: 0.0,
        detail: format!(
            "mass in B_{} went from {b0:.6e} to {b1:.6e} (fraction {kept:.4})",
            settings.ball_radius
        ),
    }];

    let supp: Vec<(f64, f64)> = run.series.iter().map(|s| (s.t, s.support_radius)).collect();
    let slopes = decade_slopes(&supp, t_end, 3);
    let increasing = matches!(&slopes, Ok(s) if s.windows(2).all(|w| w[1] > w[0]));
    if let Ok(s) = &slopes {
        for (i, v) in s.iter().enumerate() {
            constants.insert(format!("support_slope_decade{}", i + 1), *v);
        }
    }
    let lambda = report.lambda;
    if let Some(l) = lambda {
        constants.insert("lambda_formal".into(), l);
    }
    let super_rate = match (lambda, run.fits.support_exponent) {
        (Some(l), Some(e)) if l > 0.0 => e >= (1.0 + tol.super_rate) / l,
        _ => false,
    };
    verdicts.push(Verdict {
        name: "front_growth".into(),
        passed: increasing || super_rate,
        measured: slopes.as_ref().ok().and_then(|s| s.last().copied()),
        target: lambda.filter(|l| *l > 0.0).map_or(0.0, |l| (1.0 + tol.super_rate) / l),
        tolerance: tol.super_rate,
        detail: format!(
            "decade log-slopes {:?} (increasing: {increasing}); support exponent {:?} vs (1 + {}) / lambda_formal with lambda_formal = {:?} (exceeds: {super_rate}); the {}% margin is a calibration",
            slopes.as_ref().map_err(|e| e.to_string()),
            run.fits.support_exponent,
            tol.super_rate,
            lambda,
            tol.super_rate * 100.0
        ),
    });
    verdicts.push(conservation_verdict(std::slice::from_ref(&run), &settings));
    let proxy = Some(format!(
        "proxy: unbounded support is not observable on a finite grid; the verdict combines mass escape from B_{} with front growth that is super-power-law or exceeds the formal 1/lambda rate by a calibrated {}%",
        settings.ball_radius,
        tol.super_rate * 100.0
    ));
    finish(kind, spec, settings, vec![run], verdicts, constants, proxy, warnings, None, start)
}

struct BarenblattRun {
    linf: f64,
    l1: f64,
    seconds: f64,
    record: RunRecord,
    profile: ProfileComparison,
}

fn barenblatt_run(
    bundle: &Arc<GeometricBundle>,
    spec: &ProblemConfig,
    exact: &Barenblatt,
    cells: usize,
    t_end: f64,
    ball: f64,
) -> Result<BarenblattRun> {
    let start = Instant::now();
    let r_max = 1.5 * exact.front(t_end.max(1.0));
    let config = SolverConfig {
        grid: GridSpec::Uniform { cells, r_max },
        ..spec.solver.clone().unwrap_or_default()
    };
    let mut solver = Solver::new(bundle.clone(), config)?;
    solver.track_ball(ball.min(r_max))?;
    let u0 = exact.cell_averages(solver.grid(), 1.0)?;
    let mut state = solver.state_from_cells(1.0, u0)?;
    let record = if t_end > 1.0 {
        let schedule = ObservationSchedule::Linear {
            every: (t_end - 1.0) / 10.0,
        };
        record(&mut solver, &mut state, t_end, schedule, format!("K{cells}"), exact.mass())?
    } else {
        let o = solver.observe(&state);
        RunRecord {
            label: format!("K{cells}"),
            mass: exact.mass(),
            series: vec![point(&o)],
            fits: Fits::default(),
            steps: 0,
            extensions: 0,
            truncated: false,
            worst_undershoot: 0.0,
            mass_drift: 0.0,
            warnings: Vec::new(),
        }
    };
    let ex = exact.cell_averages(solver.grid(), t_end.max(1.0))?;
    let w = solver.grid().weighted_volumes();
    let peak = ex.iter().copied().fold(0.0, f64::max);
    let linf = state.u.iter().zip(&ex).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / peak;
    let diff: f64 = state.u.iter().zip(&ex).zip(w).map(|((a, b), w)| (a - b).abs() * w).sum();
    let total: f64 = ex.iter().zip(w).map(|(b, w)| b * w).sum();
    let centers = solver.grid().centers();
    let rows = centers
        .iter()
        .zip(&state.u)
        .zip(&ex)
        .map(|((&r, &u), &e)| (r, u, e))
        .collect();
    Ok(BarenblattRun {
        linf,
        l1: diff / total,
        seconds: start.elapsed().as_secs_f64(),
        record,
        profile: ProfileComparison { t: state.time, rows },
    })
}

/// Evolution of the exact Euclidean porous-medium source solution from `t = 1`.
pub fn experiment_barenblatt(spec: &ProblemConfig) -> Result<ExperimentResult> {
    let kind = ExperimentKind::Barenblatt;
    let start = Instant::now();
    let settings = settings_of(spec);
    if spec.beta != 1.0 || spec.nu != 0.0 || spec.mu != 0.0 || spec.alpha != 0.0 || spec.p != 2.0 || !(spec.m > 1.0) {
        return Err(Error::InvalidExperiment(format!(
            "the Barenblatt comparison needs beta = 1, nu = mu = 0, alpha = 0, p = 2, m > 1 (got beta {}, nu {}, mu {}, alpha {}, p {}, m {})",
            spec.beta, spec.nu, spec.mu, spec.alpha, spec.p, spec.m
        )));
    }
    let exact = Barenblatt::new(spec.n, spec.m, settings.mass)?;
    let t_end = settings.t_end_for(kind);
    if !(t_end >= 1.0) {
        return Err(Error::InvalidInput(format!("t_end = {t_end} precedes the initial time 1")));
    }
    let bundle = Arc::new(spec.bundle()?);
    let kc = settings.convergence_cells;
    let resolutions = [settings.cells, kc, 2 * kc];
    let mut runs: Vec<BarenblattRun> = resolutions
        .par_iter()
        .map(|&k| barenblatt_run(&bundle, spec, &exact, k, t_end, settings.ball_radius))
        .collect::<Result<_>>()?;
    let fine = runs.remove(0);
    let (coarse, finer) = (&runs[0], &runs[1]);
    let tol = &settings.tolerances;
    let ratio = coarse.linf / finer.linf;
    let mut constants = BTreeMap::new();
    constants.insert("linf".into(), fine.linf);
    constants.insert("l1".into(), fine.l1);
    constants.insert("convergence_ratio".into(), ratio);
    constants.insert("k".into(), exact.k());
    constants.insert("a".into(), exact.a());
    constants.insert("c".into(), exact.c());
    let mut verdicts = vec![
        Verdict {
            name: "linf_error".into(),
            passed: fine.linf <= tol.barenblatt_linf,
            measured: Some(fine.linf),
            target: 0.0,
            tolerance: tol.barenblatt_linf,
            detail: format!("relative sup-norm error at K = {}", settings.cells),
        },
        Verdict {
            name: "l1_error".into(),
            passed: fine.l1 <= tol.barenblatt_l1,
            measured: Some(fine.l1),
            target: 0.0,
            tolerance: tol.barenblatt_l1,
            detail: format!("relative weighted L1 error at K = {}", settings.cells),
        },
        Verdict {
            name: "runtime".into(),
            passed: fine.seconds <= tol.barenblatt_seconds,
            measured: Some(fine.seconds),
            target: 0.0,
            tolerance: tol.barenblatt_seconds,
            detail: format!("wall time of the K = {} run in seconds", settings.cells),
        },
    ];
    if t_end > 1.0 {
        verdicts.push(Verdict {
            name: "convergence".into(),
            passed: ratio >= tol.convergence.0 && ratio <= tol.convergence.1,
            measured: Some(ratio),
            target: 2.0,
            tolerance: tol.convergence.1 - tol.convergence.0,
            detail: format!(
                "sup-norm error ratio K = {kc} -> {}: {:.4e} / {:.4e}, band [{}, {}]",
                2 * kc,
                coarse.linf,
                finer.linf,
                tol.convergence.0,
                tol.convergence.1
            ),
        });
    }
    let records: Vec<RunRecord> = std::iter::once(fine.record)
        .chain(runs.into_iter().map(|r| r.record))
        .collect();
    verdicts.push(conservation_verdict(&records, &settings));
    finish(
        kind,
        spec,
        settings,
        records,
        verdicts,
        constants,
        None,
        Vec::new(),
        Some(fine.profile),
        start,
    )
}

/// Dispatches on `kind`; the universal sweep uses the configured masses.
pub fn run_experiment(kind: ExperimentKind, spec: &ProblemConfig) -> Result<ExperimentResult> {
    match kind {
        ExperimentKind::Decay => experiment_decay(spec),
        ExperimentKind::Fsp => experiment_fsp(spec),
        ExperimentKind::Universal => experiment_universal(spec, &settings_of(spec).masses),
        ExperimentKind::Blowup => experiment_blowup(spec),
        ExperimentKind::Barenblatt => experiment_barenblatt(spec),
    }
}
