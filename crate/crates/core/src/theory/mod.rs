//! Assumption checks, regime classification and predicted rates.

mod assumptions;
pub(crate) mod lemmas;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::geometry::{Density, GeometricBundle, Warp};

pub use assumptions::{
    check_assumptions, sobolev_exponent, tail_start, AssumptionId, AssumptionRecord, AssumptionReport, IBL_R0,
    MONOTONE_TOL,
};
pub use lemmas::{check_structural_lemmas, LemmaRecord, LemmaReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Degenerate,
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    pub sup_estimate: bool,
    pub fsp: bool,
    pub universal_bound: bool,
    pub interface_blowup: bool,
}

/// Parameters of the built-in power-log family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLogParams {
    pub n: f64,
    pub p: f64,
    pub m: f64,
    pub beta: f64,
    pub nu: f64,
    pub alpha: f64,
    pub mu: f64,
}

impl PowerLogParams {
    pub fn from_bundle(bundle: &GeometricBundle) -> Option<Self> {
        let Warp::PowerLog { beta, nu, .. } = *bundle.manifold().warp_kind() else {
            return None;
        };
        let Density::PowerLog { alpha, mu, .. } = *bundle.density().kind() else {
            return None;
        };
        let e = bundle.exponents();
        Some(PowerLogParams {
            n: bundle.manifold().n(),
            p: e.p,
            m: e.m,
            beta,
            nu,
            alpha,
            mu,
        })
    }

    pub fn q(&self) -> f64 {
        self.p + self.m - 3.0
    }

    /// Exponent of `R` in `psi`.
    pub fn lambda(&self) -> f64 {
        self.p - self.alpha + (1.0 + self.beta * (self.n - 1.0) - self.alpha) * self.q()
    }

    /// Exponent of `ln R` in `psi`.
    pub fn sigma(&self) -> f64 {
        self.nu * (self.n - 1.0) * self.q() + self.mu * (self.p + self.m - 2.0)
    }

    pub fn delta1(&self) -> f64 {
        (self.beta * (self.n - 1.0) + 1.0 - self.alpha) / self.lambda()
    }

    pub fn delta2(&self) -> f64 {
        self.sigma() * self.delta1() - self.mu - self.nu * (self.n - 1.0)
    }

    /// Critical decay exponent separating finite propagation from interface blow-up.
    pub fn alpha_star(&self) -> f64 {
        ((self.beta * (self.n - 1.0) + 1.0) * self.q() + self.p) / (self.p + self.m - 2.0)
    }

    /// Lower bound `(N-1)(1-beta) p*/N` on `alpha` (zero when `beta = 1`).
    pub fn alpha_lower(&self) -> f64 {
        if self.beta == 1.0 {
            0.0
        } else {
            (self.n - 1.0) * (1.0 - self.beta) * sobolev_exponent(self.n, self.p) / self.n
        }
    }
}

/// Closed-form conditions of the power-log family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleConditions {
    /// `N(p+m-3) + p > 0`
    pub growth: bool,
    /// `alpha < alpha*`
    pub below_critical: bool,
    /// `p > alpha > (N-1)(1-beta)p*/N`; the homogeneous case `alpha = 0`
    /// with `beta = 1` is admitted.
    pub window: bool,
    /// `(p-1)/(N-1) < beta`
    pub beta_admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub case: Case,
    pub lambda: Option<f64>,
    pub sigma: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub alpha_star: Option<f64>,
    /// `(N - alpha1)(p+m-3) + p - alpha2`
    pub eta: f64,
    pub flags: RegimeFlags,
    pub conditions: Option<ExampleConditions>,
    pub assumptions: AssumptionReport,
    pub lemmas: LemmaReport,
    pub notes: Vec<String>,
}

/// Predicted exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub lambda: Option<f64>,
    pub sigma: Option<f64>,
    pub delta1: f64,
    pub delta2: Option<f64>,
    /// True when `delta1` comes from a numerical log-log slope.
    pub numeric: bool,
}

/// Geometric assumptions shared by every result.
const GEOMETRY: [AssumptionId; 6] = [
    AssumptionId::MIso,
    AssumptionId::MGrow,
    AssumptionId::MGrowup,
    AssumptionId::MPhyp,
    AssumptionId::MInc,
    AssumptionId::MIsoup,
];

/// Runs the assumption checks and sets the regime flags.
pub fn classify(bundle: &GeometricBundle) -> Result<TheoryReport> {
    let exps = bundle.exponents();
    let (p, q) = (exps.p, exps.q());
    let n = bundle.manifold().n();
    let (a1, a2) = bundle.density().window();
    if a2 >= p {
        return Err(Error::InvalidSpec(format!(
            "monotonicity window ({a1}, {a2}) must lie below p = {p}"
        )));
    }
    let case = if q > 0.0 {
        Case::Degenerate
    } else if q < 0.0 {
        Case::Singular
    } else {
        return Err(Error::InvalidSpec("p + m - 3 = 0 is neither degenerate nor singular".into()));
    };
    let assumptions = check_assumptions(bundle)?;
    let lemmas = check_structural_lemmas(bundle, &assumptions)?;
    let eta = (n - a1) * q + p - a2;
    let params = PowerLogParams::from_bundle(bundle);
    let mut notes = Vec::new();

    let conditions = params.map(|pl| ExampleConditions {
        growth: n * q + p > 0.0,
        below_critical: pl.alpha < pl.alpha_star(),
        window: p > pl.alpha && (pl.alpha > pl.alpha_lower() || (pl.beta == 1.0 && pl.alpha == 0.0)),
        beta_admissible: pl.beta > (p - 1.0) / (n - 1.0),
    });
    let alpha = bundle.density().alpha();
    let geometry_ok = assumptions.all_passed(&GEOMETRY);
    let psi_ok = bundle.psi_is_monotone();
    // the density window only constrains genuinely decaying densities
    let density_ok = assumptions.passed(AssumptionId::DnfVol)
        && assumptions.passed(AssumptionId::Close)
        && (alpha == 0.0 || assumptions.all_passed(&[AssumptionId::DnfDec, AssumptionId::DnfInc]));

    let sup_core = match conditions {
        Some(c) => c.below_critical && c.window && geometry_ok && density_ok,
        None => geometry_ok && density_ok && psi_ok,
    };
    let sup_estimate = match case {
        Case::Degenerate => sup_core,
        Case::Singular => {
            let growth = conditions.is_none_or(|c| c.growth);
            sup_core && growth && eta > 0.0 && psi_ok
        }
    };
    if !geometry_ok {
        let failed: Vec<&str> = GEOMETRY
            .iter()
            .filter(|&&id| !assumptions.passed(id))
            .map(|id| id.as_str())
            .collect();
        notes.push(format!("geometric assumptions failing: {}", failed.join(", ")));
    }
    let degenerate = case == Case::Degenerate;
    let fsp = degenerate && psi_ok && assumptions.passed(AssumptionId::FspDoubling);
    let decays_fast = match params {
        Some(pl) => pl.alpha > p,
        None => true,
    };
    let universal_bound = degenerate && decays_fast && geometry_ok && assumptions.passed(AssumptionId::UnbDecay);
    let interface_blowup = degenerate && assumptions.passed(AssumptionId::IblIntegral);
    if case == Case::Singular && eta <= 0.0 {
        notes.push(format!("eta = {eta} <= 0: sup estimate refused"));
    }
    if !psi_ok {
        notes.push("psi is not strictly increasing on the tabulation".into());
    }

    Ok(TheoryReport {
        case,
        lambda: params.map(|pl| pl.lambda()),
        sigma: params.map(|pl| pl.sigma()),
        delta1: params.map(|pl| pl.delta1()),
        delta2: params.map(|pl| pl.delta2()),
        alpha_star: params.map(|pl| pl.alpha_star()),
        eta,
        flags: RegimeFlags {
            sup_estimate,
            fsp,
            universal_bound,
            interface_blowup,
        },
        conditions,
        assumptions,
        lemmas,
        notes,
    })
}

/// `(lambda, sigma, delta1, delta2)` in closed form for the built-in family,
/// otherwise `delta1` from the log-log slope of `1/V_rho(Z(t))` on `[1e3, 1e6]`.
pub fn predicted_rates(bundle: &GeometricBundle) -> Result<Rates> {
    if let Some(pl) = PowerLogParams::from_bundle(bundle) {
        let lambda = pl.lambda();
        if !(lambda > 0.0) {
            return Err(Error::Regime(format!("lambda = {lambda} <= 0: no decay rate")));
        }
        return Ok(Rates {
            lambda: Some(lambda),
            sigma: Some(pl.sigma()),
            delta1: pl.delta1(),
            delta2: Some(pl.delta2()),
            numeric: false,
        });
    }
    Ok(Rates {
        lambda: None,
        sigma: None,
        delta1: numeric_delta1(bundle, 1e3, 1e6)?,
        delta2: None,
        numeric: true,
    })
}

/// Least-squares slope of `ln V_rho(Z(t))` against `ln t` (unit mass).
pub fn numeric_delta1(bundle: &GeometricBundle, t0: f64, t1: f64) -> Result<f64> {
    let k = 25;
    let mut xs = Vec::with_capacity(k);
    let mut ys = Vec::with_capacity(k);
    for i in 0..k {
        let t = t0 * (t1 / t0).powf(i as f64 / (k - 1) as f64);
        let v = bundle.vol_rho(bundle.z_tilde(t)?)?;
        xs.push(t.ln());
        ys.push(v.ln());
    }
    let mx = xs.iter().sum::<f64>() / k as f64;
    let my = ys.iter().sum::<f64>() / k as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// `M / V_rho(Z(gamma0 t M^{p+m-3}))` at each time.
pub fn sup_bound_curve(bundle: &GeometricBundle, mass: f64, times: &[f64], gamma0: f64) -> Result<Vec<f64>> {
    let q = bundle.exponents().q();
    if !(mass > 0.0 && gamma0 > 0.0) {
        return Err(Error::InvalidInput("mass and gamma0 must be positive".into()));
    }
    times
        .iter()
        .map(|&t| {
            if !(t > 0.0) {
                return Err(Error::InvalidInput(format!("time {t} must be positive")));
            }
            let r = bundle.z_tilde(gamma0 * t * mass.powf(q))?;
            Ok(mass / bundle.vol_rho(r)?)
        })
        .collect()
}

/// `4 R0 + Z(gamma t M^{p+m-3})`.
pub fn fsp_radius(bundle: &GeometricBundle, mass: f64, r0: f64, t: f64, gamma: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time {t} must be nonnegative")));
    }
    let q = bundle.exponents().q();
    Ok(4.0 * r0 + bundle.z_tilde(gamma * t * mass.powf(q))?)
}

/// One row of an `alpha` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub flags: Option<RegimeFlags>,
    pub lambda: Option<f64>,
    pub delta1: Option<f64>,
    pub alpha_star: Option<f64>,
    pub error: Option<String>,
}

/// Classifies `config` for each `alpha` (window re-derived per value unless pinned).
pub fn sweep_alpha(config: &ProblemConfig, alphas: &[f64]) -> Vec<SweepRow> {
    alphas
        .par_iter()
        .map(|&alpha| {
            let mut cfg = config.clone();
            cfg.alpha = alpha;
            let outcome = cfg.bundle().and_then(|b| classify(&b));
            match outcome {
                Ok(rep) => SweepRow {
                    alpha,
                    flags: Some(rep.flags),
                    lambda: rep.lambda,
                    delta1: rep.delta1,
                    alpha_star: rep.alpha_star,
                    error: None,
                },
                Err(e) => SweepRow {
                    alpha,
                    flags: None,
                    lambda: None,
                    delta1: None,
                    alpha_star: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// CSV `alpha,sup_estimate,fsp,universal_bound,interface_blowup,lambda,delta1,alpha_star`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "alpha,sup_estimate,fsp,universal_bound,interface_blowup,lambda,delta1,alpha_star")?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v}"));
    for r in rows {
        let f = |b: fn(&RegimeFlags) -> bool| r.flags.as_ref().map_or(String::new(), |fl| (b(fl) as u8).to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.alpha,
            f(|x| x.sup_estimate),
            f(|x| x.fsp),
            f(|x| x.universal_bound),
            f(|x| x.interface_blowup),
            opt(r.lambda),
            opt(r.delta1),
            opt(r.alpha_star)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_exponents() {
        let pl = PowerLogParams {
            n: 3.0,
            p: 2.0,
            m: 2.0,
            beta: 1.0,
            nu: 0.0,
            alpha: 1.0,
            mu: 1.0,
        };
        assert_eq!(pl.lambda(), 3.0);
        assert_eq!(pl.sigma(), 2.0);
        assert!((pl.delta1() - 2.0 / 3.0).abs() < 1e-15);
        assert!((pl.delta2() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(pl.alpha_star(), 2.5);
    }

    #[test]
    fn alpha_lower_bound() {
        let mut pl = PowerLogParams {
            n: 3.0,
            p: 2.0,
            m: 2.0,
            beta: 0.6,
            nu: 0.0,
            alpha: 1.0,
            mu: 0.0,
        };
        assert!((pl.alpha_lower() - 1.6).abs() < 1e-12);
        pl.beta = 1.0;
        assert_eq!(pl.alpha_lower(), 0.0);
    }
}
