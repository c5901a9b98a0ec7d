//! Run CSVs, result JSON and gnuplot data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ExperimentKind, ExperimentResult, RunRecord};
use crate::error::Result;

fn run_csv(run: &RunRecord) -> String {
    let mut s = String::from("t,sup,support_radius,mass,mass_in_unit_ball\n");
    for p in &run.series {
        let _ = writeln!(
            s,
            "{:e},{:e},{:e},{:e},{:e}",
            p.t, p.sup, p.support_radius, p.mass, p.mass_in_unit_ball
        );
    }
    s
}

/// Reference line `y = c x^e` through the last point of `run`.
fn reference(run: &RunRecord, exponent: f64, y: impl Fn(&super::SeriesPoint) -> f64) -> String {
    match run.series.last() {
        Some(p) if p.t > 0.0 => format!("y = {:e} * x**({exponent})", y(p) / p.t.powf(exponent)),
        _ => "none".into(),
    }
}

/// Gnuplot data: two columns per block, one block per run, blocks separated by two blank lines.
pub fn plot_data(result: &ExperimentResult) -> String {
    let mut s = String::new();
    let c = |k: &str| result.constants.get(k).copied();
    match result.kind {
        ExperimentKind::Decay | ExperimentKind::Universal => {
            let e = match result.kind {
                ExperimentKind::Decay => c("delta1").map(|d| -d),
                _ => c("exponent_predicted"),
            };
            let _ = writeln!(s, "# x: t");
            let _ = writeln!(s, "# y: sup_x u(x, t)");
            if let (Some(e), Some(run)) = (e, result.runs.last()) {
                let _ = writeln!(s, "# reference (predicted rate): {}", reference(run, e, |p| p.sup));
            }
            for (i, run) in result.runs.iter().enumerate() {
                if i > 0 {
                    s.push_str("\n\n");
                }
                let _ = writeln!(s, "# run {} (mass {})", run.label, run.mass);
                for p in run.series.iter().filter(|p| p.t > 0.0) {
                    let _ = writeln!(s, "{:e} {:e}", p.t, p.sup);
                }
            }
        }
        ExperimentKind::Fsp | ExperimentKind::Blowup => {
            let e = match result.kind {
                ExperimentKind::Fsp => c("support_exponent_predicted"),
                _ => c("lambda_formal").filter(|l| *l > 0.0).map(|l| 1.0 / l),
            };
            let _ = writeln!(s, "# x: t");
            let _ = writeln!(s, "# y: support radius");
            match (e, result.runs.first()) {
                (Some(e), Some(run)) => {
                    let _ = writeln!(s, "# reference (predicted rate): {}", reference(run, e, |p| p.support_radius));
                }
                _ => {
                    let _ = writeln!(s, "# reference (predicted rate): none (1/lambda is not a growth rate here)");
                }
            }
            for run in &result.runs {
                let _ = writeln!(s, "# run {} (mass {})", run.label, run.mass);
                for p in run.series.iter().filter(|p| p.t > 0.0) {
                    let _ = writeln!(s, "{:e} {:e}", p.t, p.support_radius);
                }
            }
        }
        ExperimentKind::Barenblatt => {
            let _ = writeln!(s, "# x: r");
            let _ = writeln!(s, "# y: u(r, t_end)");
            let _ = writeln!(
                s,
                "# reference (exact profile): y = t**(-k) * max(C - a * x**2 * t**(-2*k/N), 0)**(1/(m-1)) with k = {}, a = {}, C = {}, N = {}, m = {}",
                c("k").unwrap_or(f64::NAN),
                c("a").unwrap_or(f64::NAN),
                c("c").unwrap_or(f64::NAN),
                result.spec.n,
                result.spec.m
            );
            if let Some(prof) = &result.profile {
                let _ = writeln!(s, "# t = {}", prof.t);
                for (r, u, _) in &prof.rows {
                    let _ = writeln!(s, "{r:e} {u:e}");
                }
            }
        }
    }
    s
}

/// Writes `<kind>.json`, `<kind>_<run>.csv` per run and `<kind>.dat` into `dir`; returns the paths.
pub fn write_outputs(result: &ExperimentResult, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let kind = result.kind.as_str();
    let mut paths = Vec::new();
    for run in &result.runs {
        let path = dir.join(format!("{kind}_{}.csv", run.label));
        fs::write(&path, run_csv(run))?;
        paths.push(path);
    }
    let json = dir.join(format!("{kind}.json"));
    fs::write(&json, serde_json::to_string_pretty(result)?)?;
    paths.push(json);
    let dat = dir.join(format!("{kind}.dat"));
    fs::write(&dat, plot_data(result))?;
    paths.push(dat);
    Ok(paths)
}
