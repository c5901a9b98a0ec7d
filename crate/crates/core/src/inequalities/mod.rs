//! Empirical constants of the functional inequalities on families of radial
//! test functions.
//!
//! Every record reports `max LHS/RHS` over the family. Levels `k` of the
//! Faber-Krahn type estimates are fractions of each function's sup, which
//! keeps all ratios invariant under `u -> cu`.

mod family;
mod function;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GeometricBundle;
use crate::theory::lemmas::min_forward_ratio;
use crate::theory::{check_assumptions, sobolev_exponent, AssumptionId, AssumptionReport};

pub use family::{named_family, Bump, FamilySpec};
pub use function::{Measure, RadialTestFunction, Rearrangement, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    SobolevWeighted,
    Hardy,
    FaberKrahn,
    FaberKrahnS,
    EmbOld,
    EmbOldP,
    Sgn,
    Sgns,
    SgnW,
    SgnsW,
}

impl InequalityId {
    pub const ALL: [InequalityId; 10] = [
        InequalityId::SobolevWeighted,
        InequalityId::Hardy,
        InequalityId::FaberKrahn,
        InequalityId::FaberKrahnS,
        InequalityId::EmbOld,
        InequalityId::EmbOldP,
        InequalityId::Sgn,
        InequalityId::Sgns,
        InequalityId::SgnW,
        InequalityId::SgnsW,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            InequalityId::SobolevWeighted => "sobolev_weighted",
            InequalityId::Hardy => "hardy",
            InequalityId::FaberKrahn => "faber_krahn",
            InequalityId::FaberKrahnS => "faber_krahn_s",
            InequalityId::EmbOld => "emb_old",
            InequalityId::EmbOldP => "emb_old_p",
            InequalityId::Sgn => "sgn",
            InequalityId::Sgns => "sgns",
            InequalityId::SgnW => "sgn_w",
            InequalityId::SgnsW => "sgns_w",
        }
    }

    fn requirements(&self) -> &'static [AssumptionId] {
        use AssumptionId::*;
        const HARDY: &[AssumptionId] = &[MIso, MPhyp, MIsoup];
        const SOB: &[AssumptionId] = &[MIso, MGrow, MGrowup, MPhyp];
        const FK: &[AssumptionId] = &[MIso, MGrow, MGrowup, MPhyp, MIsoup, DnfInc, Close];
        const FKS: &[AssumptionId] = &[MIso, MGrow, MGrowup, MPhyp, MIsoup, Close];
        const SGN_W: &[AssumptionId] = &[MIso, MGrow, MGrowup, MPhyp, MIsoup, DnfInc, DnfDec, Close];
        const SGNS_W: &[AssumptionId] = &[MIso, MGrow, MGrowup, MPhyp, MIsoup, DnfDec, Close];
        match self {
            InequalityId::Hardy => HARDY,
            InequalityId::SobolevWeighted | InequalityId::EmbOld | InequalityId::EmbOldP => SOB,
            InequalityId::FaberKrahn | InequalityId::Sgn => FK,
            InequalityId::FaberKrahnS | InequalityId::Sgns => FKS,
            InequalityId::SgnW => SGN_W,
            InequalityId::SgnsW => SGNS_W,
        }
    }
}

impl std::fmt::Display for InequalityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    Failed,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalitySample {
    pub function: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityParams {
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_fractions: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub id: InequalityId,
    pub status: Status,
    /// `max LHS/RHS` over the family.
    pub constant: Option<f64>,
    pub worst_index: Option<usize>,
    pub worst_level: Option<f64>,
    pub params: InequalityParams,
    /// Whether the assumptions behind the inequality passed on this bundle.
    pub preconditions_met: bool,
    /// Members excluded as expected divergences.
    pub flagged: usize,
    pub detail: String,
    pub samples: Vec<InequalitySample>,
}

impl InequalityRecord {
    fn not_applicable(id: InequalityId, params: InequalityParams, detail: String) -> Self {
        InequalityRecord {
            id,
            status: Status::NotApplicable,
            constant: None,
            worst_index: None,
            worst_level: None,
            params,
            preconditions_met: false,
            flagged: 0,
            detail,
            samples: Vec::new(),
        }
    }

    fn failed(id: InequalityId, params: InequalityParams, err: &Error) -> Self {
        InequalityRecord {
            status: Status::Failed,
            ..Self::not_applicable(id, params, err.to_string())
        }
    }

    fn from_samples(id: InequalityId, params: InequalityParams, samples: Vec<InequalitySample>, flagged: usize) -> Self {
        let bad = samples.iter().filter(|s| !s.ratio.is_finite()).count();
        let worst = samples
            .iter()
            .filter(|s| s.ratio.is_finite())
            .max_by(|a, b| a.ratio.total_cmp(&b.ratio));
        let passed = bad == 0 && worst.is_some();
        InequalityRecord {
            id,
            status: if passed { Status::Passed } else { Status::Failed },
            constant: worst.map(|s| s.ratio).filter(|_| passed),
            worst_index: worst.map(|s| s.function),
            worst_level: worst.and_then(|s| s.level),
            params,
            preconditions_met: true,
            flagged,
            detail: format!(
                "{} samples, {bad} non-finite ratios, {flagged} flagged as expected divergences",
                samples.len()
            ),
            samples,
        }
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn sample(function: usize, level: Option<f64>, lhs: f64, rhs: f64) -> InequalitySample {
    InequalitySample { function, level, lhs, rhs, ratio: ratio(lhs, rhs) }
}

fn grad_p(measure: &Measure, u: &RadialTestFunction, p: f64, k: f64) -> Result<f64> {
    measure.integrate_above(u, k, |s| s.du.abs().powf(p))
}

fn weighted_norm(measure: &Measure, u: &RadialTestFunction, q: f64) -> Result<f64> {
    measure.integrate(u, |s| s.rho * s.u.powf(q))
}

fn plain_norm(measure: &Measure, u: &RadialTestFunction, q: f64) -> Result<f64> {
    measure.integrate(u, |s| s.u.powf(q))
}

/// `rho(R) R^p` at `R = R_rho(s)`.
fn rho_r_p(bundle: &GeometricBundle, p: f64, s: f64) -> Result<f64> {
    let r = bundle.inv_vol_rho(s)?;
    Ok(bundle.rho(r) * r.powf(p))
}

fn collect<F>(family: &[RadialTestFunction], f: F) -> Result<Vec<InequalitySample>>
where
    F: Fn(usize, &RadialTestFunction) -> Result<Vec<InequalitySample>> + Sync,
{
    let per: Vec<Vec<InequalitySample>> = family
        .par_iter()
        .enumerate()
        .map(|(i, u)| f(i, u))
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// `int u^p / r^p dmu <= gamma int |u'|^p dmu`. For `p >= N` members with
/// `u(0) != 0` diverge and are flagged.
pub fn verify_hardy(measure: &Measure, family: &[RadialTestFunction], p: f64) -> Result<InequalityRecord> {
    let n = measure.bundle().manifold().n();
    let flagged = family.iter().filter(|u| p >= n && u.values()[0] != 0.0).count();
    let samples = collect(family, |i, u| {
        if p >= n && u.values()[0] != 0.0 {
            return Ok(vec![]);
        }
        let lhs = measure.integrate(u, |s| s.u.powf(p) / s.r.powf(p))?;
        Ok(vec![sample(i, None, lhs, grad_p(measure, u, p, 0.0)?)])
    })?;
    Ok(InequalityRecord::from_samples(
        InequalityId::Hardy,
        InequalityParams { p, r: None, s: None, k_fractions: None },
        samples,
        flagged,
    ))
}

/// `(int u^{p*} omega(V(r))^{-p*} dmu)^{(N-p)/N} <= C int |u'|^p dmu`, `p < N`.
pub fn verify_weighted_sobolev(measure: &Measure, family: &[RadialTestFunction], p: f64) -> Result<InequalityRecord> {
    let n = measure.bundle().manifold().n();
    let params = InequalityParams { p, r: None, s: None, k_fractions: None };
    if p >= n {
        return Ok(InequalityRecord::not_applicable(
            InequalityId::SobolevWeighted,
            params,
            format!("needs p < N (p = {p}, N = {n})"),
        ));
    }
    let ps = sobolev_exponent(n, p);
    let samples = collect(family, |i, u| {
        let inner = measure.integrate(u, |s| (s.u / s.omega).powf(ps))?;
        Ok(vec![sample(i, None, inner.powf((n - p) / n), grad_p(measure, u, p, 0.0)?)])
    })?;
    Ok(InequalityRecord::from_samples(InequalityId::SobolevWeighted, params, samples, 0))
}

/// Levels `k = fraction * sup u` below the sup.
fn levels(u: &RadialTestFunction, fractions: &[f64]) -> Vec<f64> {
    let sup = u.sup();
    fractions.iter().map(|f| f * sup).filter(|&k| k < sup).collect()
}

/// `nu_rho(k) = mu_rho({u > k})`.
pub fn nu_rho(measure: &Measure, u: &RadialTestFunction, k: f64) -> Result<f64> {
    measure.integrate_above(u, k, |s| s.rho)
}

/// `int_{u>k} rho (u-k)^p <= gamma rho(R) R^p int_{u>k} |u'|^p` with `R = R_rho(nu_rho(k))`.
pub fn verify_faber_krahn(
    measure: &Measure,
    family: &[RadialTestFunction],
    p: f64,
    k_fractions: &[f64],
) -> Result<InequalityRecord> {
    let bundle = measure.bundle();
    let samples = collect(family, |i, u| {
        levels(u, k_fractions)
            .into_iter()
            .map(|k| {
                let nu = nu_rho(measure, u, k)?;
                let lhs = measure.integrate_above(u, k, |s| s.rho * (s.u - k).powf(p))?;
                let rhs = rho_r_p(bundle, p, nu)? * grad_p(measure, u, p, k)?;
                Ok(sample(i, Some(k), lhs, rhs))
            })
            .collect()
    })?;
    Ok(InequalityRecord::from_samples(
        InequalityId::FaberKrahn,
        InequalityParams { p, r: None, s: None, k_fractions: Some(k_fractions.to_vec()) },
        samples,
        0,
    ))
}

/// The `s`-power version: `int_{u>k} rho (u-k)^s <= gamma [rho(R) R^p]^{s/p}
/// nu^{1-s/p} (int_{u>k} |u'|^p)^{s/p}`, `p < s < p*`.
pub fn verify_faber_krahn_s(
    measure: &Measure,
    family: &[RadialTestFunction],
    p: f64,
    s_exp: f64,
    k_fractions: &[f64],
) -> Result<InequalityRecord> {
    let bundle = measure.bundle();
    let samples = collect(family, |i, u| {
        levels(u, k_fractions)
            .into_iter()
            .map(|k| {
                let nu = nu_rho(measure, u, k)?;
                let lhs = measure.integrate_above(u, k, |s| s.rho * (s.u - k).powf(s_exp))?;
                let e = s_exp / p;
                let rhs = rho_r_p(bundle, p, nu)?.powf(e) * nu.powf(1.0 - e) * grad_p(measure, u, p, k)?.powf(e);
                Ok(sample(i, Some(k), lhs, rhs))
            })
            .collect()
    })?;
    Ok(InequalityRecord::from_samples(
        InequalityId::FaberKrahnS,
        InequalityParams { p, r: None, s: Some(s_exp), k_fractions: Some(k_fractions.to_vec()) },
        samples,
        0,
    ))
}

/// Per-function integrals shared by the interpolation inequalities.
#[derive(Debug, Clone, Copy)]
struct Moments {
    /// unweighted `int u^r`, `int u^p`
    i_r: f64,
    i_p: f64,
    /// weighted `E_r`, `E_p`, `E_s`
    e_r: f64,
    e_p: f64,
    e_s: f64,
    grad: f64,
    support: f64,
}

fn moments(measure: &Measure, u: &RadialTestFunction, p: f64, r: f64, s: f64) -> Result<Moments> {
    Ok(Moments {
        i_r: plain_norm(measure, u, r)?,
        i_p: plain_norm(measure, u, p)?,
        e_r: weighted_norm(measure, u, r)?,
        e_p: weighted_norm(measure, u, p)?,
        e_s: weighted_norm(measure, u, s)?,
        grad: grad_p(measure, u, p, 0.0)?,
        support: measure.support_measure(u)?,
    })
}

/// Interpolation inequalities with `0 < r < p < s`: the unweighted
/// embeddings at `q = p` and their support form, the weighted
/// Gagliardo-Nirenberg type bounds in `S` and `Sigma`, and their `W` forms.
pub fn verify_interpolation(
    measure: &Measure,
    family: &[RadialTestFunction],
    p: f64,
    r: f64,
    s: f64,
) -> Result<Vec<InequalityRecord>> {
    let bundle = measure.bundle();
    let n = bundle.manifold().n();
    if !(0.0 < r && r < p && p < s) {
        return Err(Error::InvalidInput(format!("interpolation needs 0 < r < p < s (got {r}, {p}, {s})")));
    }
    let (a1, a2) = bundle.density().window();
    let h = |x: f64| (p - x) * (n - a1) + x * (p - a2);
    let mom: Vec<Moments> = family
        .par_iter()
        .map(|u| moments(measure, u, p, r, s))
        .collect::<Result<_>>()?;

    type Rhs<'a> = Box<dyn Fn(&Moments) -> Result<(f64, f64)> + Sync + 'a>;
    let d = n * (p - r) + r * p;
    let cases: Vec<(InequalityId, Rhs)> = vec![
        (
            InequalityId::EmbOld,
            Box::new(|m: &Moments| {
                let sq = m.i_r.powf(p / (p - r)) * m.i_p.powf(-r / (p - r));
                Ok((m.i_p, bundle.omega(sq)?.powf(p) * sq.powf(p / n) * m.grad))
            }),
        ),
        (
            InequalityId::EmbOldP,
            Box::new(|m: &Moments| {
                let rhs = bundle.omega(m.support)?.powf(p * n * (p - r) / d)
                    * m.i_r.powf(p * p / d)
                    * m.grad.powf(n * (p - r) / d);
                Ok((m.i_p, rhs))
            }),
        ),
        (
            InequalityId::Sgn,
            Box::new(|m: &Moments| {
                let big_s = m.e_r.powf(p / (p - r)) * m.e_p.powf(-r / (p - r));
                Ok((m.e_p, rho_r_p(bundle, p, big_s)? * m.grad))
            }),
        ),
        (
            InequalityId::Sgns,
            Box::new(|m: &Moments| {
                let sigma = m.e_r.powf(s / (s - r)) * m.e_s.powf(-r / (s - r));
                let e = s / p;
                Ok((m.e_s, rho_r_p(bundle, p, sigma)?.powf(e) * sigma.powf(1.0 - e) * m.grad.powf(e)))
            }),
        ),
        (
            InequalityId::SgnW,
            Box::new(|m: &Moments| {
                let big_s = m.e_r.powf(p / (p - r)) * m.e_p.powf(-r / (p - r));
                let g = (p - r) * (n - a1) / h(r);
                let rhs = m.e_r.powf(p * (p - a2) / h(r)) * bundle.characteristic_w(big_s)?.powf(g) * m.grad.powf(g);
                Ok((m.e_p, rhs))
            }),
        ),
        (
            InequalityId::SgnsW,
            Box::new(|m: &Moments| {
                let sigma = m.e_r.powf(s / (s - r)) * m.e_s.powf(-r / (s - r));
                let g = (s - r) * (n - a1) / h(r);
                let rhs = m.e_r.powf(h(s) / h(r)) * bundle.characteristic_w(sigma)?.powf(g) * m.grad.powf(g);
                Ok((m.e_s, rhs))
            }),
        ),
    ];

    let mut out = Vec::new();
    for (id, rhs) in cases {
        let needs_s = matches!(id, InequalityId::Sgns | InequalityId::SgnsW);
        let params = InequalityParams { p, r: Some(r), s: needs_s.then_some(s), k_fractions: None };
        if p >= n || (needs_s && s >= n.min(sobolev_exponent(n, p))) {
            out.push(InequalityRecord::not_applicable(
                id,
                params,
                format!("needs p < N and, for the s-forms, s < min(N, p*) (p = {p}, s = {s}, N = {n})"),
            ));
            continue;
        }
        let samples: Result<Vec<InequalitySample>> = mom
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let (lhs, rhs) = rhs(m)?;
                Ok(sample(i, None, lhs, rhs))
            })
            .collect();
        out.push(match samples {
            Ok(v) => InequalityRecord::from_samples(id, params, v, 0),
            Err(e) => InequalityRecord::failed(id, params, &e),
        });
    }
    Ok(out)
}

/// Spot check of `rho(R) R^{N - s(N-p)/p} <= C rho(R1) R1^{N - s(N-p)/p}` for `R < R1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FksCondition {
    pub s: f64,
    pub exponent: f64,
    pub constant: Option<f64>,
    pub passed: bool,
}

pub fn check_fks_condition(bundle: &GeometricBundle, p: f64, s: f64) -> FksCondition {
    let n = bundle.manifold().n();
    let exponent = n - s * (n - p) / p;
    let g: Vec<f64> = bundle.radii().iter().map(|&r| bundle.rho(r) * r.powf(exponent)).collect();
    let c = 1.0 / min_forward_ratio(&g);
    FksCondition {
        s,
        exponent,
        constant: c.is_finite().then_some(c.max(1.0)),
        passed: c.is_finite() && c < 1e6,
    }
}

/// Suite parameters; unset exponents default to `r = p/2` and
/// `s = p + (min(N, p*) - p)/4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteSettings {
    pub family: FamilySpec,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub k_fractions: Vec<f64>,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        SuiteSettings {
            family: FamilySpec::default(),
            r: None,
            s: None,
            k_fractions: vec![0.0, 0.25, 0.5, 0.75, 0.9],
        }
    }
}

impl SuiteSettings {
    pub fn exponents(&self, n: f64, p: f64) -> (f64, f64) {
        let r = self.r.unwrap_or(0.5 * p);
        let top = n.min(sobolev_exponent(n, p));
        let s = self.s.unwrap_or(if top.is_finite() && top > p { p + 0.25 * (top - p) } else { p + 0.5 });
        (r, s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub family: FamilySpec,
    pub p: f64,
    pub r: f64,
    pub s: f64,
    pub records: Vec<InequalityRecord>,
    pub fks_condition: FksCondition,
    /// Worst relative mismatch of `int phi(u) dmu` against `int phi(u*) ds`
    /// for `phi` in `{x, x^2, x^p}`.
    pub equimeasurability: f64,
    pub equimeasurability_worst: usize,
}

impl InequalityReport {
    pub fn get(&self, id: InequalityId) -> Option<&InequalityRecord> {
        self.records.iter().find(|r| r.id == id)
    }
}

/// Relative equimeasurability errors of `u` for `phi` in `{x, x^2, x^p}`.
pub fn equimeasurability_error(measure: &Measure, u: &RadialTestFunction, p: f64) -> Result<f64> {
    let ra = measure.rearrange(u)?;
    let mut worst = 0.0f64;
    for q in [1.0, 2.0, p] {
        let direct = plain_norm(measure, u, q)?;
        let cake = ra.layer_cake(measure, |l| q * l.powf(q - 1.0))?;
        if direct > 0.0 {
            worst = worst.max((cake - direct).abs() / direct);
        }
    }
    Ok(worst)
}

fn mark_preconditions(mut rec: InequalityRecord, report: &AssumptionReport, extra: Option<(bool, String)>) -> InequalityRecord {
    let failing: Vec<&str> = rec
        .id
        .requirements()
        .iter()
        .filter(|&&a| !report.passed(a))
        .map(|a| a.as_str())
        .collect();
    let mut ok = failing.is_empty();
    if !failing.is_empty() {
        rec.detail.push_str(&format!("; assumptions failing: {}", failing.join(", ")));
    }
    if let Some((extra_ok, what)) = extra {
        ok &= extra_ok;
        if !extra_ok {
            rec.detail.push_str(&format!("; {what}"));
        }
    }
    if rec.status != Status::NotApplicable {
        rec.preconditions_met = ok;
    }
    rec
}

/// Runs every inequality over the family built from `settings`.
pub fn run_suite(bundle: &GeometricBundle, settings: &SuiteSettings) -> Result<InequalityReport> {
    let p = bundle.exponents().p;
    let n = bundle.manifold().n();
    let (r, s) = settings.exponents(n, p);
    let family = settings.family.build()?;
    let measure = Measure::new(bundle, &settings.family.nodes())?;
    let assumptions = check_assumptions(bundle)?;
    let fks = check_fks_condition(bundle, p, s);
    let fks_note = Some((fks.passed, format!("s-growth condition fails for s = {s}")));
    let ks = &settings.k_fractions;

    let guard = |id: InequalityId, params: InequalityParams, res: Result<InequalityRecord>| match res {
        Ok(rec) => rec,
        Err(e) => InequalityRecord::failed(id, params, &e),
    };
    let plain = InequalityParams { p, r: None, s: None, k_fractions: None };
    let with_k = InequalityParams { k_fractions: Some(ks.clone()), ..plain.clone() };
    let mut records = vec![
        guard(InequalityId::SobolevWeighted, plain.clone(), verify_weighted_sobolev(&measure, &family, p)),
        guard(InequalityId::Hardy, plain.clone(), verify_hardy(&measure, &family, p)),
        guard(InequalityId::FaberKrahn, with_k.clone(), verify_faber_krahn(&measure, &family, p, ks)),
    ];
    if p < n && s < sobolev_exponent(n, p) {
        records.push(guard(
            InequalityId::FaberKrahnS,
            InequalityParams { s: Some(s), ..with_k.clone() },
            verify_faber_krahn_s(&measure, &family, p, s, ks),
        ));
    } else {
        records.push(InequalityRecord::not_applicable(
            InequalityId::FaberKrahnS,
            InequalityParams { s: Some(s), ..with_k },
            format!("needs p < s < p* (p = {p}, s = {s})"),
        ));
    }
    records.extend(verify_interpolation(&measure, &family, p, r, s)?);
    let records = records
        .into_iter()
        .map(|rec| {
            let extra = matches!(rec.id, InequalityId::FaberKrahnS | InequalityId::Sgns | InequalityId::SgnsW)
                .then(|| fks_note.clone().unwrap());
            mark_preconditions(rec, &assumptions, extra)
        })
        .collect();

    let errs: Vec<f64> = family
        .par_iter()
        .map(|u| equimeasurability_error(&measure, u, p))
        .collect::<Result<_>>()?;
    let (worst_i, worst) = errs
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, e)| if e > acc.1 { (i, e) } else { acc });

    Ok(InequalityReport {
        family: settings.family.clone(),
        p,
        r,
        s,
        records,
        fks_condition: fks,
        equimeasurability: worst,
        equimeasurability_worst: worst_i,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ProblemConfig;

    #[test]
    fn zero_over_zero_is_zero() {
        assert_eq!(ratio(0.0, 0.0), 0.0);
        assert!(ratio(1.0, 0.0).is_infinite());
    }

    #[test]
    fn default_exponents() {
        let s = SuiteSettings::default();
        let (r, se) = s.exponents(3.0, 2.0);
        assert_eq!(r, 1.0);
        assert!((se - 2.25).abs() < 1e-15);
    }

    #[test]
    fn small_suite_runs() {
        let bundle = ProblemConfig::euclidean(3, 2.0, 2.0, 1.0).bundle().unwrap();
        let settings = SuiteSettings {
            family: FamilySpec { count: 6, segments: 128, ..FamilySpec::default() },
            ..SuiteSettings::default()
        };
        let rep = run_suite(&bundle, &settings).unwrap();
        assert_eq!(rep.records.len(), 10);
        for rec in &rep.records {
            assert_eq!(rec.status, Status::Passed, "{rec:?}");
            assert!(rec.preconditions_met, "{}: {}", rec.id, rec.detail);
        }
        assert!(rep.equimeasurability < 1e-6);
    }
}
