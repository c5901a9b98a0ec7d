//! Sampled predicates for the structural assumptions on `f` and `rho`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::quadrature::adaptive_simpson_split;
use crate::geometry::GeometricBundle;

/// Relative slack allowed at each adjacent node pair of a monotonicity check.
pub const MONOTONE_TOL: f64 = 1e-8;
/// Half-width of the exponent probes of the blow-up integral.
pub const IBL_R0: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssumptionId {
    #[serde(rename = "M_iso")]
    MIso,
    #[serde(rename = "M_grow")]
    MGrow,
    #[serde(rename = "M_growup")]
    MGrowup,
    #[serde(rename = "M_phyp")]
    MPhyp,
    #[serde(rename = "M_inc")]
    MInc,
    #[serde(rename = "M_isoup")]
    MIsoup,
    #[serde(rename = "dnf_dec")]
    DnfDec,
    #[serde(rename = "dnf_inc")]
    DnfInc,
    #[serde(rename = "dnf_vol")]
    DnfVol,
    #[serde(rename = "close")]
    Close,
    #[serde(rename = "fsp_doubling")]
    FspDoubling,
    #[serde(rename = "unb_decay")]
    UnbDecay,
    #[serde(rename = "ibl_integral")]
    IblIntegral,
}

impl AssumptionId {
    pub const ALL: [AssumptionId; 13] = [
        AssumptionId::MIso,
        AssumptionId::MGrow,
        AssumptionId::MGrowup,
        AssumptionId::MPhyp,
        AssumptionId::MInc,
        AssumptionId::MIsoup,
        AssumptionId::DnfDec,
        AssumptionId::DnfInc,
        AssumptionId::DnfVol,
        AssumptionId::Close,
        AssumptionId::FspDoubling,
        AssumptionId::UnbDecay,
        AssumptionId::IblIntegral,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AssumptionId::MIso => "M_iso",
            AssumptionId::MGrow => "M_grow",
            AssumptionId::MGrowup => "M_growup",
            AssumptionId::MPhyp => "M_phyp",
            AssumptionId::MInc => "M_inc",
            AssumptionId::MIsoup => "M_isoup",
            AssumptionId::DnfDec => "dnf_dec",
            AssumptionId::DnfInc => "dnf_inc",
            AssumptionId::DnfVol => "dnf_vol",
            AssumptionId::Close => "close",
            AssumptionId::FspDoubling => "fsp_doubling",
            AssumptionId::UnbDecay => "unb_decay",
            AssumptionId::IblIntegral => "ibl_integral",
        }
    }
}

impl fmt::Display for AssumptionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionRecord {
    pub id: AssumptionId,
    pub passed: bool,
    /// Best empirical constant on the sampled range (`None` if unbounded).
    pub fitted_constant: Option<f64>,
    /// Radius where the predicate is tightest or first violated.
    pub worst_point: f64,
    pub detail: String,
}

/// One record per assumption, in [`AssumptionId::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub records: Vec<AssumptionRecord>,
}

impl AssumptionReport {
    pub fn get(&self, id: AssumptionId) -> &AssumptionRecord {
        self.records
            .iter()
            .find(|r| r.id == id)
            .expect("every assumption id is recorded")
    }

    pub fn passed(&self, id: AssumptionId) -> bool {
        self.get(id).passed
    }

    pub fn all_passed(&self, ids: &[AssumptionId]) -> bool {
        ids.iter().all(|&id| self.passed(id))
    }

    /// `c` of the non-parabolicity integral (reciprocal of the fitted `c^{-1}`).
    pub fn phyp_c(&self) -> Option<f64> {
        let r = self.get(AssumptionId::MPhyp);
        if r.passed {
            r.fitted_constant.map(|ci| 1.0 / ci)
        } else {
            None
        }
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Scans `y` for the largest relative move against the required direction.
/// Returns `(worst relative violation, index)`.
fn monotone_violation(y: &[f64], increasing: bool) -> (f64, usize) {
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0;
    for i in 1..y.len() {
        let (a, b) = (y[i - 1], y[i]);
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        let v = if increasing { (a - b) / scale } else { (b - a) / scale };
        if v > worst {
            worst = v;
            at = i;
        }
    }
    (worst, at)
}

/// Quasi-monotonicity constant `max_{i<j} y_j / y_i` (nonincreasing target)
/// or `max_{i<j} y_i / y_j` (nondecreasing target), with its location.
fn quasi_constant(y: &[f64], increasing: bool) -> (f64, usize) {
    let mut best = 1.0f64;
    let mut at = 0;
    if increasing {
        let mut run_max = f64::NEG_INFINITY;
        for (j, &v) in y.iter().enumerate() {
            run_max = run_max.max(v);
            let q = run_max / v;
            if q > best {
                best = q;
                at = j;
            }
        }
    } else {
        let mut run_min = f64::INFINITY;
        for (j, &v) in y.iter().enumerate() {
            run_min = run_min.min(v);
            let q = v / run_min;
            if q > best {
                best = q;
                at = j;
            }
        }
    }
    (best, at)
}

fn monotone_record(id: AssumptionId, xs: &[f64], ys: &[f64], increasing: bool, what: &str) -> AssumptionRecord {
    if xs.len() < 2 {
        return AssumptionRecord {
            id,
            passed: false,
            fitted_constant: None,
            worst_point: f64::NAN,
            detail: format!("{what}: fewer than two sample points in range"),
        };
    }
    if ys.iter().any(|v| !v.is_finite()) {
        return AssumptionRecord {
            id,
            passed: false,
            fitted_constant: None,
            worst_point: f64::NAN,
            detail: format!("{what}: non-finite samples"),
        };
    }
    let (viol, i) = monotone_violation(ys, increasing);
    let (q, j) = quasi_constant(ys, increasing);
    let passed = viol <= MONOTONE_TOL;
    AssumptionRecord {
        id,
        passed,
        fitted_constant: finite(q),
        worst_point: if passed { xs[j] } else { xs[i] },
        detail: format!(
            "{what} {} on [{:.3e}, {:.3e}]: worst adjacent violation {viol:.2e}, quasi-monotonicity constant {q:.6}",
            if increasing { "nondecreasing" } else { "nonincreasing" },
            xs[0],
            xs[xs.len() - 1]
        ),
    }
}

/// Point beyond which the built-in profiles are pure power-log laws.
pub fn tail_start(bundle: &GeometricBundle) -> f64 {
    bundle
        .manifold()
        .tail_start()
        .max(bundle.density().tail_start())
        .max(1.0)
}

/// `p* = Np/(N-p)`, infinite for `p >= N`.
pub fn sobolev_exponent(n: f64, p: f64) -> f64 {
    if p < n {
        n * p / (n - p)
    } else {
        f64::INFINITY
    }
}

/// Log-log slope of `g` between `r / 10` and `r`.
pub(crate) fn tail_slope<F: Fn(f64) -> Result<f64>>(g: F, r: f64) -> Result<f64> {
    let a = g(0.1 * r)?;
    let b = g(r)?;
    Ok((b.ln() - a.ln()) / 10f64.ln())
}

/// Tests every assumption on the bundle's tabulation nodes.
pub fn check_assumptions(bundle: &GeometricBundle) -> Result<AssumptionReport> {
    let opts = bundle.options();
    if opts.r_max / opts.r_min < 1e4 {
        return Err(Error::range("tabulation decades", (opts.r_max / opts.r_min).log10(), 4.0, f64::INFINITY));
    }
    let n = bundle.manifold().n();
    let radii = bundle.radii();
    let vols = bundle.volumes();
    let area: Vec<f64> = radii.iter().map(|&r| bundle.volume_derivative(r)).collect();
    if vols.iter().chain(&area).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite volume samples".into()));
    }
    let s0 = tail_start(bundle);
    let mut records = Vec::with_capacity(13);

    // M_iso: omega(V(r)) nondecreasing
    let omega: Vec<f64> = vols
        .iter()
        .zip(&area)
        .map(|(&v, &a)| v.powf((n - 1.0) / n) / a)
        .collect();
    records.push(monotone_record(AssumptionId::MIso, radii, &omega, true, "omega(V(r))"));

    // M_grow / M_growup: V'(R) against h(V(R)) through the inverse volume
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let (mut lo_at, mut hi_at) = (radii[0], radii[0]);
    for (k, &r) in radii.iter().enumerate().step_by(4) {
        let h = bundle.isoperimetric_h(vols[k])?;
        let ratio = area[k] / h;
        if ratio < lo {
            lo = ratio;
            lo_at = r;
        }
        if ratio > hi {
            hi = ratio;
            hi_at = r;
        }
    }
    records.push(AssumptionRecord {
        id: AssumptionId::MGrow,
        passed: lo > 0.0 && lo.is_finite(),
        fitted_constant: finite(lo),
        worst_point: lo_at,
        detail: format!("min V'(R)/h(V(R)) = {lo:.10}; any c below it (and below 1) is admissible"),
    });
    records.push(AssumptionRecord {
        id: AssumptionId::MGrowup,
        passed: hi.is_finite() && hi > 0.0,
        fitted_constant: finite(hi),
        worst_point: hi_at,
        detail: format!("max V'(R)/h(V(R)) = {hi:.10}; c^-1 must be at least this (and above 1)"),
    });

    records.push(check_phyp(bundle)?);

    // M_inc: R V'(R) <= N V(R)
    let inc: Vec<f64> = (0..radii.len()).map(|k| radii[k] * area[k] / (n * vols[k])).collect();
    let (imax, iat) = inc
        .iter()
        .enumerate()
        .fold((f64::NEG_INFINITY, 0), |acc, (k, &v)| if v > acc.0 { (v, k) } else { acc });
    records.push(AssumptionRecord {
        id: AssumptionId::MInc,
        passed: imax <= 1.0 + MONOTONE_TOL,
        fitted_constant: finite(imax),
        worst_point: radii[iat],
        detail: format!("max R V'(R) / (N V(R)) = {imax:.10} (must be <= 1)"),
    });

    // M_isoup: V(R)/R <= c^-1 h(V(R)) = c^-1 V'(R)
    let iso: Vec<f64> = (0..radii.len()).map(|k| vols[k] / (radii[k] * area[k])).collect();
    let (umax, uat) = iso
        .iter()
        .enumerate()
        .fold((f64::NEG_INFINITY, 0), |acc, (k, &v)| if v > acc.0 { (v, k) } else { acc });
    records.push(AssumptionRecord {
        id: AssumptionId::MIsoup,
        passed: umax.is_finite() && umax > 0.0,
        fitted_constant: finite(umax.max(1.0)),
        worst_point: radii[uat],
        detail: format!("max V(R) / (R h(V(R))) = {umax:.10}"),
    });

    // density window, checked where both profiles are pure power-log laws
    let (a1, a2) = bundle.density().window();
    let tail: Vec<f64> = radii.iter().copied().filter(|&r| r > s0).collect();
    let beyond_one: Vec<f64> = radii.iter().copied().filter(|&r| r > 1.0).collect();
    for (id, expo, increasing) in [(AssumptionId::DnfDec, a1, false), (AssumptionId::DnfInc, a2, true)] {
        let ys: Vec<f64> = tail.iter().map(|&s| bundle.rho(s) * s.powf(expo)).collect();
        let mut rec = monotone_record(id, &tail, &ys, increasing, &format!("rho(s) s^{expo}"));
        let whole: Vec<f64> = beyond_one.iter().map(|&s| bundle.rho(s) * s.powf(expo)).collect();
        let (q, _) = quasi_constant(&whole, increasing);
        rec.fitted_constant = if rec.passed { finite(q) } else { None };
        rec.detail.push_str(&format!("; constant over s > 1 including the core: {q:.6}"));
        records.push(rec);
    }

    // dnf_vol
    let vr: Vec<f64> = radii.iter().zip(vols).map(|(&r, &v)| bundle.rho(r) * v).collect();
    let (viol, at) = monotone_violation(&vr, true);
    let min_step = vr.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    let strict = vr.windows(2).all(|w| w[1] > w[0]);
    records.push(AssumptionRecord {
        id: AssumptionId::DnfVol,
        passed: strict && bundle.vol_rho_is_monotone(),
        fitted_constant: finite(min_step),
        worst_point: radii[at],
        detail: format!("rho V strictly increasing required; worst adjacent decrease {viol:.2e}, min adjacent ratio {min_step:.12}"),
    });

    records.push(check_close(bundle, &tail)?);

    // fsp_doubling: rho(r) <= C rho(2r)
    let mut dmax = 0.0f64;
    let mut dat = radii[0];
    for &r in radii.iter().filter(|&&r| 2.0 * r <= opts.r_max) {
        let q = bundle.rho(r) / bundle.rho(2.0 * r);
        if q > dmax {
            dmax = q;
            dat = r;
        }
    }
    records.push(AssumptionRecord {
        id: AssumptionId::FspDoubling,
        passed: dmax.is_finite(),
        fitted_constant: finite(dmax),
        worst_point: dat,
        detail: format!("max rho(r)/rho(2r) = {dmax:.6}"),
    });

    records.push(check_unb(bundle)?);
    records.push(check_ibl(bundle)?);

    debug_assert_eq!(records.len(), 13);
    Ok(AssumptionReport { records })
}

/// Non-parabolicity: `int_0^k dt / V^{-1}(t)^p <= c^{-1} k / V^{-1}(k)^p`,
/// evaluated as `int_0^R V'(r) r^{-p} dr` against `V(R) R^{-p}`.
fn check_phyp(bundle: &GeometricBundle) -> Result<AssumptionRecord> {
    let n = bundle.manifold().n();
    let p = bundle.exponents().p;
    let radii = bundle.radii();
    let vols = bundle.volumes();
    if p >= n {
        return Ok(AssumptionRecord {
            id: AssumptionId::MPhyp,
            passed: false,
            fitted_constant: None,
            worst_point: 0.0,
            detail: format!("integral diverges at the pole: V(r) ~ r^N with p = {p} >= N = {n}"),
        });
    }
    // near-pole part with V ~ c r^N
    let mut acc = vols[0] * radii[0].powf(-p) * n / (n - p);
    let mut worst = f64::NEG_INFINITY;
    let mut at = radii[0];
    let mut prev = radii[0];
    for (k, &r) in radii.iter().enumerate() {
        if k > 0 {
            let q = adaptive_simpson_split(
                |s| bundle.volume_derivative(s) * s.powf(-p),
                prev,
                r,
                bundle.breaks(),
                0.0,
                1e-10,
            )?;
            acc += q.value;
            prev = r;
        }
        let ratio = acc / (vols[k] * r.powf(-p));
        if !ratio.is_finite() {
            return Err(Error::Numeric(format!("non-finite non-parabolicity ratio at r = {r:e}")));
        }
        if ratio > worst {
            worst = ratio;
            at = r;
        }
    }
    Ok(AssumptionRecord {
        id: AssumptionId::MPhyp,
        passed: worst.is_finite(),
        fitted_constant: finite(worst),
        worst_point: at,
        detail: format!("smallest admissible c^-1 = {worst:.8} (c = {:.8})", 1.0 / worst),
    })
}

/// `rho(s) omega(V(s))^{p*}` nonincreasing beyond some `s0`. Candidates start
/// at `tail[0]` and move out a quarter decade at a time while at least two
/// decades of tabulation remain; the first success is reported.
fn check_close(bundle: &GeometricBundle, tail: &[f64]) -> Result<AssumptionRecord> {
    let Some(&first) = tail.first() else {
        return close_on(bundle, tail);
    };
    let last = *tail.last().unwrap();
    let mut s0 = first;
    let mut initial = None;
    while s0 <= last / 100.0 {
        let sub: Vec<f64> = tail.iter().copied().filter(|&r| r >= s0).collect();
        let rec = close_on(bundle, &sub)?;
        if rec.passed {
            return Ok(rec);
        }
        initial.get_or_insert(rec);
        s0 *= 10f64.powf(0.25);
    }
    match initial {
        Some(rec) => Ok(rec),
        None => close_on(bundle, tail),
    }
}

/// The monotonicity test on a fixed tail. For `p >= N` the exponent is
/// infinite and the limit requires `omega` nonincreasing, with `rho`
/// nonincreasing wherever `omega` is flat.
fn close_on(bundle: &GeometricBundle, tail: &[f64]) -> Result<AssumptionRecord> {
    let n = bundle.manifold().n();
    let p = bundle.exponents().p;
    let ps = sobolev_exponent(n, p);
    let omega: Vec<f64> = tail
        .iter()
        .map(|&s| bundle.omega_at_radius(s))
        .collect::<Result<_>>()?;
    if ps.is_finite() {
        // compare in log form to avoid overflow of omega^{p*}
        let logs: Vec<f64> = tail
            .iter()
            .zip(&omega)
            .map(|(&s, &w)| bundle.rho(s).ln() + ps * w.ln())
            .collect();
        let mut worst = f64::NEG_INFINITY;
        let mut at = 0;
        for i in 1..logs.len() {
            let scale = 1.0 + logs[i].abs().max(logs[i - 1].abs());
            let v = (logs[i] - logs[i - 1]) / scale;
            if v > worst {
                worst = v;
                at = i;
            }
        }
        let passed = tail.len() >= 2 && worst <= MONOTONE_TOL;
        let ys: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
        let (q, j) = quasi_constant(&ys, false);
        Ok(AssumptionRecord {
            id: AssumptionId::Close,
            passed,
            fitted_constant: if passed { finite(q) } else { None },
            worst_point: if passed { tail.get(j).copied().unwrap_or(f64::NAN) } else { tail.get(at).copied().unwrap_or(f64::NAN) },
            detail: format!(
                "rho omega(V)^p* with p* = {ps:.6} on s > {:.4}: worst relative log increase {worst:.2e}",
                tail.first().copied().unwrap_or(f64::NAN)
            ),
        })
    } else {
        let (wv, wi) = monotone_violation(&omega, false);
        let mut rho_ok = true;
        let mut bad = 0;
        for i in 1..tail.len() {
            let flat = (omega[i] - omega[i - 1]).abs() <= MONOTONE_TOL * omega[i].abs();
            if flat && bundle.rho(tail[i]) > bundle.rho(tail[i - 1]) * (1.0 + MONOTONE_TOL) {
                rho_ok = false;
                bad = i;
            }
        }
        let passed = tail.len() >= 2 && wv <= MONOTONE_TOL && rho_ok;
        Ok(AssumptionRecord {
            id: AssumptionId::Close,
            passed,
            fitted_constant: if passed { Some(1.0) } else { None },
            worst_point: tail.get(if rho_ok { wi } else { bad }).copied().unwrap_or(f64::NAN),
            detail: format!("p >= N: p* infinite; omega(V) worst relative increase {wv:.2e}, rho monotone where omega is flat: {rho_ok}"),
        })
    }
}

/// `rho(t) <= c^{-1} t^{-a}` for some `a > p`, judged from the tail slope.
fn check_unb(bundle: &GeometricBundle) -> Result<AssumptionRecord> {
    let p = bundle.exponents().p;
    let r_max = bundle.r_max();
    let slope = -tail_slope(|r| Ok(bundle.rho(r)), r_max)?;
    if !(slope > p + 1e-6) {
        return Ok(AssumptionRecord {
            id: AssumptionId::UnbDecay,
            passed: false,
            fitted_constant: None,
            worst_point: r_max,
            detail: format!("tail decay exponent {slope:.6} does not exceed p = {p}"),
        });
    }
    let a = 0.5 * (p + slope);
    let mut cmax = 0.0f64;
    let mut at = 1.0;
    for &t in bundle.radii().iter().filter(|&&t| t > 1.0) {
        let v = bundle.rho(t) * t.powf(a);
        if v > cmax {
            cmax = v;
            at = t;
        }
    }
    Ok(AssumptionRecord {
        id: AssumptionId::UnbDecay,
        passed: cmax.is_finite(),
        fitted_constant: finite(cmax),
        worst_point: at,
        detail: format!("tail decay exponent {slope:.6} > p; sup rho(t) t^{a:.4} over t > 1 = {cmax:.6e}"),
    })
}

/// `int_1^inf (t^p rho)^r psi^{1/(p+m-3)} dt/t` for `r in {-r0, 0, r0}`:
/// quadrature up to `r_max` plus a power-law tail from the local slopes.
fn check_ibl(bundle: &GeometricBundle) -> Result<AssumptionRecord> {
    let exps = bundle.exponents();
    let (p, q) = (exps.p, exps.q());
    let r_max = bundle.r_max();
    if !(q > 0.0) {
        return Ok(AssumptionRecord {
            id: AssumptionId::IblIntegral,
            passed: false,
            fitted_constant: None,
            worst_point: r_max,
            detail: "defined for the degenerate range only".into(),
        });
    }
    let rho_slope = tail_slope(|r| Ok(bundle.rho(r)), r_max)?;
    let psi_slope = tail_slope(|r| bundle.psi(r), r_max)?;
    let log_max = r_max.ln();
    let mut worst_total = 0.0f64;
    let mut passed = true;
    let mut parts = Vec::new();
    for r in [-IBL_R0, 0.0, IBL_R0] {
        let g = |x: f64| -> f64 {
            let t = x.exp();
            let psi = bundle.psi(t).unwrap_or(f64::NAN);
            (t.powf(p) * bundle.rho(t)).powf(r) * psi.powf(1.0 / q)
        };
        let body = adaptive_simpson_split(g, 0.0, log_max, &[], 0.0, 1e-8)?.value;
        if !body.is_finite() {
            return Err(Error::Numeric(format!("non-finite blow-up integrand for r = {r}")));
        }
        let kappa = r * (p + rho_slope) + psi_slope / q;
        let tail = if kappa < -1e-3 { g(log_max) / -kappa } else { f64::INFINITY };
        let total = body + tail;
        if !total.is_finite() {
            passed = false;
        }
        worst_total = worst_total.max(total);
        parts.push(format!("r = {r:+.2}: tail exponent {kappa:.4}, integral {total:.6e}"));
    }
    Ok(AssumptionRecord {
        id: AssumptionId::IblIntegral,
        passed,
        fitted_constant: if passed { finite(worst_total) } else { None },
        worst_point: r_max,
        detail: parts.join("; "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quasi_constant_of_monotone_sequences_is_one() {
        assert_eq!(quasi_constant(&[3.0, 2.0, 1.0], false).0, 1.0);
        assert_eq!(quasi_constant(&[1.0, 2.0, 3.0], true).0, 1.0);
        assert_eq!(quasi_constant(&[1.0, 2.0, 1.5], false).0, 2.0);
    }

    #[test]
    fn violation_sign_convention() {
        let (v, i) = monotone_violation(&[1.0, 2.0, 1.0], true);
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(i, 2);
        assert!(monotone_violation(&[1.0, 1.0, 1.0], true).0 <= 0.0);
    }

    #[test]
    fn sobolev_exponent_limits() {
        assert_eq!(sobolev_exponent(3.0, 2.0), 6.0);
        assert!(sobolev_exponent(3.0, 3.0).is_infinite());
    }
}
