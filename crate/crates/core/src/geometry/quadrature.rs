//! Adaptive Simpson quadrature and fixed Gauss-Legendre rules.

use crate::error::{Error, Result};

/// Result of an adaptive integration: value and accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson on `[a, b]` with mixed tolerance `abs_tol + rel_tol * |I|`.
///
/// The local acceptance test is the classic `|S2 - S1| <= 15 eps`; the
/// returned error is the sum of the accepted `|S2 - S1| / 15` terms.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quad>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(Quad { value: 0.0, error: 0.0 });
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // a coarse global estimate turns the relative tolerance into an absolute one
    let scale = crude_magnitude(&f, a, b).max(whole.abs());
    let eps = abs_tol.max(rel_tol * scale);
    let mut err = 0.0;
    let value = recurse(&f, a, b, fa, fm, fb, whole, eps, MAX_DEPTH, &mut err)?;
    if !value.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite integral on [{a:e}, {b:e}]"
        )));
    }
    Ok(Quad { value, error: err })
}

fn crude_magnitude<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let n = 16;
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| f(a + (i as f64 + 0.5) * h).abs() * h.abs())
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    err: &mut f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return Err(Error::Numeric(format!("integrand not finite near {m:e}")));
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps || depth == 0 || (m - a).abs() <= f64::EPSILON * m.abs() {
        if depth == 0 && delta.abs() > 15.0 * eps {
            return Err(Error::Numeric(format!(
                "adaptive Simpson did not converge on [{a:e}, {b:e}]"
            )));
        }
        *err += delta.abs() / 15.0;
        return Ok(left + right + delta / 15.0);
    }
    Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1, err)?
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1, err)?)
}

/// Integrates over `[a, b]`, splitting at the given interior breakpoints.
pub fn adaptive_simpson_split<F>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quad>
where
    F: Fn(f64) -> f64,
{
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(|x, y| x.total_cmp(y));
    let mut total = Quad { value: 0.0, error: 0.0 };
    for w in pts.windows(2) {
        let q = adaptive_simpson(&f, w[0], w[1], abs_tol, rel_tol)?;
        total.value += q.value;
        total.error += q.error;
    }
    Ok(total)
}

/// Gauss-Legendre rule on `[-1, 1]`, computed by Newton iteration on `P_n`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}
