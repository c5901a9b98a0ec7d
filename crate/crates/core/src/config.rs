//! JSON problem configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DensityProfile, Exponents, GeometricBundle, ManifoldProfile, TabulationOptions};
use crate::harness::ExperimentSettings;
use crate::solver::SolverConfig;

fn default_a() -> f64 {
    std::f64::consts::E
}
fn default_r_max() -> f64 {
    1e4
}
fn default_nodes() -> usize {
    2048
}

/// One Cauchy problem: exponents, built-in profiles, tabulation range, and
/// optional solver / experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: f64,
    pub m: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default)]
    pub nu: f64,
    #[serde(rename = "A", default = "default_a")]
    pub a: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(rename = "B", default = "default_a")]
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<f64>,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSettings>,
}

fn one() -> f64 {
    1.0
}

impl ProblemConfig {
    /// Euclidean defaults (`beta = 1`, `nu = mu = 0`, `A = B = e`).
    pub fn euclidean(n: u32, p: f64, m: f64, alpha: f64) -> Self {
        ProblemConfig {
            n,
            p,
            m,
            beta: 1.0,
            nu: 0.0,
            a: std::f64::consts::E,
            alpha,
            mu: 0.0,
            b: std::f64::consts::E,
            alpha1: None,
            alpha2: None,
            r_max: default_r_max(),
            nodes: default_nodes(),
            solver: None,
            experiment: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Monotonicity window; when not configured it brackets `alpha` inside `(0, p)`.
    pub fn window(&self) -> (f64, f64) {
        let (d1, d2) = default_window(self.alpha, self.p);
        (self.alpha1.unwrap_or(d1), self.alpha2.unwrap_or(d2))
    }

    pub fn exponents(&self) -> Result<Exponents> {
        Exponents::new(self.p, self.m)
    }

    pub fn manifold(&self) -> Result<ManifoldProfile> {
        ManifoldProfile::power_log(self.n, self.beta, self.nu, self.a)
    }

    pub fn density(&self) -> Result<DensityProfile> {
        if self.b < self.a {
            return Err(Error::InvalidSpec(format!(
                "density matching point B = {} must be >= A = {}",
                self.b, self.a
            )));
        }
        DensityProfile::power_log(self.alpha, self.mu, self.b, self.window())
    }

    pub fn tabulation(&self) -> TabulationOptions {
        TabulationOptions {
            r_max: self.r_max,
            nodes: self.nodes,
            ..TabulationOptions::default()
        }
    }

    pub fn bundle(&self) -> Result<GeometricBundle> {
        GeometricBundle::new(self.manifold()?, self.density()?, self.exponents()?, self.tabulation())
    }
}

fn default_window(alpha: f64, p: f64) -> (f64, f64) {
    if alpha > 0.0 && alpha < p {
        (0.5 * alpha, 0.5 * (alpha + p))
    } else {
        let a1 = (0.01f64).min(0.25 * p);
        (a1, 2.0 * a1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_keys() {
        let cfg = ProblemConfig::from_json_str(
            r#"{"N":3,"p":2,"m":2,"beta":0.9,"nu":0,"A":2.718281828459045,
                "alpha":1,"mu":0,"B":3,"alpha1":0.5,"alpha2":1.5,"r_max":1000,"nodes":512}"#,
        )
        .unwrap();
        assert_eq!(cfg.n, 3);
        assert_eq!(cfg.window(), (0.5, 1.5));
        assert_eq!(cfg.nodes, 512);
        let back = ProblemConfig::from_json_str(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn default_window_brackets_alpha() {
        let cfg = ProblemConfig::euclidean(3, 2.0, 2.0, 1.0);
        assert_eq!(cfg.window(), (0.5, 1.5));
    }

    #[test]
    fn b_below_a_is_rejected() {
        let mut cfg = ProblemConfig::euclidean(3, 2.0, 2.0, 1.0);
        cfg.a = 5.0;
        cfg.b = 4.0;
        assert!(matches!(cfg.density(), Err(Error::InvalidSpec(_))));
    }
}
