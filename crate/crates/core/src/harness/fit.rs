//! Least-squares power laws on log-log data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `y ~ exp(intercept) t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Minimum number of points in a fit window.
pub const MIN_POINTS: usize = 10;

/// Fits `ln y = intercept + exponent ln t` over the points with `t` in `window` (inclusive).
pub fn fit_power_law(series: &[(f64, f64)], window: (f64, f64)) -> Result<PowerFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Fit(format!("window [{lo}, {hi}] is not a positive interval")));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= lo * (1.0 - 1e-12) && *t <= hi * (1.0 + 1e-12))
        .copied()
        .collect();
    if pts.len() < MIN_POINTS {
        return Err(Error::Fit(format!(
            "{} points in [{lo:e}, {hi:e}], need {MIN_POINTS}",
            pts.len()
        )));
    }
    if let Some((t, y)) = pts.iter().find(|(_, y)| !(*y > 0.0) || !y.is_finite()) {
        return Err(Error::Fit(format!("y = {y} at t = {t} is not positive")));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all times coincide".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).min(1.0) } else { 1.0 };
    Ok(PowerFit {
        exponent,
        intercept,
        r2,
        points: pts.len(),
    })
}

/// Log-log slopes over consecutive decades ending at `t_end`, oldest first.
pub fn decade_slopes(series: &[(f64, f64)], t_end: f64, decades: usize) -> Result<Vec<f64>> {
    (0..decades)
        .rev()
        .map(|k| {
            let hi = t_end / 10f64.powi(k as i32);
            let lo = hi / 10.0;
            fit_power_law(series, (lo, hi)).map(|f| f.exponent)
        })
        .collect()
}
