//! Strictly monotone tabulated functions with shape-preserving interpolation
//! and inversion.

use crate::error::{Error, Result};

/// Coordinate transform applied before interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    /// Interpolate `ln y` against `ln x`; power laws become straight lines.
    LogLog,
}

impl Scale {
    fn fwd(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::LogLog => v.ln(),
        }
    }
    fn back(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::LogLog => v.exp(),
        }
    }
}

/// Piecewise-cubic monotone (Fritsch-Carlson) interpolant through strictly
/// monotone data.
#[derive(Debug, Clone)]
pub struct MonotoneTable {
    x: Vec<f64>,
    y: Vec<f64>,
    tx: Vec<f64>,
    ty: Vec<f64>,
    slope: Vec<f64>,
    scale: Scale,
    increasing: bool,
}

impl MonotoneTable {
    /// Builds the table. Fails with [`Error::InvalidAssumption`] naming the
    /// first offending node if the ordinates are not strictly monotone.
    pub fn new(x: Vec<f64>, y: Vec<f64>, scale: Scale) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "table needs >= 2 matching nodes (got {} / {})",
                x.len(),
                y.len()
            )));
        }
        if scale == Scale::LogLog && (x[0] <= 0.0 || y.iter().any(|&v| v <= 0.0)) {
            return Err(Error::InvalidInput(
                "log-log table requires positive data".into(),
            ));
        }
        for (i, w) in x.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidInput(format!(
                    "abscissae not strictly increasing at node {i}"
                )));
            }
        }
        let increasing = y[1] > y[0];
        if let Some(i) = first_monotonicity_violation(&y, increasing) {
            return Err(Error::InvalidAssumption(format!(
                "tabulated values not strictly monotone at node {i} (x = {:e})",
                x[i]
            )));
        }
        let tx: Vec<f64> = x.iter().map(|&v| scale.fwd(v)).collect();
        let ty: Vec<f64> = y.iter().map(|&v| scale.fwd(v)).collect();
        let slope = pchip_slopes(&tx, &ty);
        Ok(MonotoneTable {
            x,
            y,
            tx,
            ty,
            slope,
            scale,
            increasing,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    /// Range of the ordinates as `(min, max)`.
    pub fn y_range(&self) -> (f64, f64) {
        let (a, b) = (self.y[0], *self.y.last().unwrap());
        (a.min(b), a.max(b))
    }

    /// Interpolated value; errors outside the node range.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.x_range();
        if !(x >= lo * (1.0 - 1e-14) && x <= hi * (1.0 + 1e-14)) {
            return Err(Error::range("table abscissa", x, lo, hi));
        }
        let x = x.clamp(lo, hi);
        let t = self.scale.fwd(x);
        let k = self.segment(t);
        Ok(self.scale.back(self.hermite(k, t)))
    }

    /// Log-slope `d ln y / d ln x` of the interpolant (log-log tables) or
    /// plain slope (linear tables) at the end nodes.
    pub fn end_slopes(&self) -> (f64, f64) {
        (self.slope[0], *self.slope.last().unwrap())
    }

    /// Derivative of the interpolant in the table's transformed coordinates.
    pub fn transformed_slope(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range();
        let t = self.scale.fwd(x.clamp(lo, hi));
        let k = self.segment(t);
        let h = self.tx[k + 1] - self.tx[k];
        let s = (t - self.tx[k]) / h;
        let (y0, y1) = (self.ty[k], self.ty[k + 1]);
        let (m0, m1) = (self.slope[k] * h, self.slope[k + 1] * h);
        let dh00 = 6.0 * s * s - 6.0 * s;
        let dh10 = 3.0 * s * s - 4.0 * s + 1.0;
        let dh01 = -6.0 * s * s + 6.0 * s;
        let dh11 = 3.0 * s * s - 2.0 * s;
        (dh00 * y0 + dh10 * m0 + dh01 * y1 + dh11 * m1) / h
    }

    /// Inverse of the interpolant: bisection on the monotone segment, then
    /// Newton polish in transformed coordinates.
    pub fn invert(&self, y: f64) -> Result<f64> {
        let (ylo, yhi) = self.y_range();
        if !(y >= ylo * (1.0 - 1e-14) && y <= yhi * (1.0 + 1e-14)) {
            return Err(Error::range("table ordinate", y, ylo, yhi));
        }
        let y = y.clamp(ylo, yhi);
        let v = self.scale.fwd(y);
        // locate segment k with ty[k] <= v <= ty[k+1] (or reversed)
        let n = self.ty.len();
        let (mut lo, mut hi) = (0usize, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let below = if self.increasing {
                self.ty[mid] <= v
            } else {
                self.ty[mid] >= v
            };
            if below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = lo;
        let (mut a, mut b) = (self.tx[k], self.tx[k + 1]);
        let g = |t: f64| self.hermite(k, t) - v;
        let ga = g(a);
        if ga == 0.0 {
            return Ok(self.scale.back(a));
        }
        let sign_a = ga.signum();
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let gm = g(m);
            if gm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if gm.signum() == sign_a {
                a = m;
            } else {
                b = m;
            }
        }
        let mut t = 0.5 * (a + b);
        let d = self.transformed_slope(self.scale.back(t));
        if d.is_finite() && d != 0.0 {
            let tn = t - g(t) / d;
            if tn >= self.tx[k] && tn <= self.tx[k + 1] && g(tn).abs() <= g(t).abs() {
                t = tn;
            }
        }
        Ok(self.scale.back(t))
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.tx.len();
        match self.tx.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    fn hermite(&self, k: usize, t: f64) -> f64 {
        let h = self.tx[k + 1] - self.tx[k];
        let s = (t - self.tx[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.ty[k] + h10 * h * self.slope[k] + h01 * self.ty[k + 1] + h11 * h * self.slope[k + 1]
    }
}

/// Index of the first node where strict monotonicity in the given direction fails.
pub fn first_monotonicity_violation(y: &[f64], increasing: bool) -> Option<usize> {
    y.windows(2)
        .position(|w| if increasing { !(w[1] > w[0]) } else { !(w[1] < w[0]) })
        .map(|i| i + 1)
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        s = 0.0;
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        s = 3.0 * d0;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cube_table() -> MonotoneTable {
        let x: Vec<f64> = (0..200).map(|i| 1e-3 * 1.05f64.powi(i)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v * v * v).collect();
        MonotoneTable::new(x, y, Scale::LogLog).unwrap()
    }

    #[test]
    fn power_law_is_exact_in_log_log() {
        let t = cube_table();
        let v = t.eval(0.5).unwrap();
        assert!((v / (3.0 * 0.125) - 1.0).abs() < 1e-12);
        let r = t.invert(3.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_monotone() {
        let err = MonotoneTable::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 2.0], Scale::Linear)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidAssumption(_)));
    }

    #[test]
    fn out_of_range_is_range_error() {
        let t = cube_table();
        assert!(matches!(t.eval(1e9), Err(Error::Range { .. })));
        assert!(matches!(t.invert(-1.0), Err(Error::Range { .. })));
    }

    #[test]
    fn decreasing_tables_invert() {
        let x: Vec<f64> = (1..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 / (1.0 + v * v)).collect();
        let t = MonotoneTable::new(x, y, Scale::Linear).unwrap();
        let r = t.invert(t.eval(7.3).unwrap()).unwrap();
        assert!((r - 7.3).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn eval_invert_round_trip(frac in 0.0f64..1.0) {
            let x: Vec<f64> = (0..300).map(|i| 1e-2 * 1.03f64.powi(i)).collect();
            let y: Vec<f64> = x.iter().map(|v| v.powf(2.5) * (1.0 + v).ln()).collect();
            let t = MonotoneTable::new(x, y, Scale::LogLog).unwrap();
            let (lo, hi) = t.y_range();
            let target = lo * (hi / lo).powf(frac);
            let r = t.invert(target).unwrap();
            let back = t.eval(r).unwrap();
            prop_assert!((back / target - 1.0).abs() < 1e-8);
        }

        #[test]
        fn interpolant_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let t = cube_table();
            let (lo, hi) = t.x_range();
            let xa = lo * (hi / lo).powf(a.min(b));
            let xb = lo * (hi / lo).powf(a.max(b));
            prop_assert!(t.eval(xa).unwrap() <= t.eval(xb).unwrap());
        }
    }
}
