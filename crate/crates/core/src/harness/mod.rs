//! Experiments comparing simulations with predictions.
//!
//! Every experiment builds its runs from a [`ProblemConfig`], fits power laws
//! over the last 1.5 decades of logged time and records one [`Verdict`] per
//! acceptance rule together with the tolerance it was judged against.

mod experiments;
mod fit;
mod output;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ProblemConfig;
use crate::error::{Error, Result};

pub use experiments::{
    experiment_barenblatt, experiment_blowup, experiment_decay, experiment_fsp, experiment_universal, run_experiment,
};
pub use fit::{decade_slopes, fit_power_law, PowerFit, MIN_POINTS};
pub use output::{plot_data, write_outputs};

/// Decades of logged time covered by every fit window.
pub const FIT_DECADES: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Decay,
    Fsp,
    Universal,
    Blowup,
    Barenblatt,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Decay,
        ExperimentKind::Fsp,
        ExperimentKind::Universal,
        ExperimentKind::Blowup,
        ExperimentKind::Barenblatt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Decay => "decay",
            ExperimentKind::Fsp => "fsp",
            ExperimentKind::Universal => "universal",
            ExperimentKind::Blowup => "blowup",
            ExperimentKind::Barenblatt => "barenblatt",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown experiment '{s}'")))
    }
}

/// Acceptance tolerances. These are policy, not derived constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative tolerance on fitted exponents.
    pub rate: f64,
    /// Largest relative gap between sup curves of different masses over the last decade.
    pub collapse: f64,
    /// Fraction of the mass in `B_R0` that must leave by `t_end`.
    pub mass_escape: f64,
    /// Excess of the support exponent over `1/lambda` counted as super-predicted growth.
    pub super_rate: f64,
    pub barenblatt_linf: f64,
    pub barenblatt_l1: f64,
    /// Accepted band for the error ratio under grid doubling.
    pub convergence: (f64, f64),
    /// Mass drift per 10^6 steps while the support is interior.
    pub conservation: f64,
    /// Undershoot below `-undershoot * sup` before clamping fails a run.
    pub undershoot: f64,
    pub barenblatt_seconds: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rate: 0.1,
            collapse: 0.15,
            mass_escape: 0.5,
            super_rate: 0.25,
            barenblatt_linf: 0.02,
            barenblatt_l1: 0.01,
            convergence: (1.5, 3.0),
            conservation: 1e-12,
            undershoot: 1e-12,
            barenblatt_seconds: 120.0,
        }
    }
}

/// Experiment parameters. Unset options take per-experiment defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSettings {
    pub mass: f64,
    /// Masses of the universal-bound sweep.
    pub masses: Vec<f64>,
    /// Radius of the initial bump.
    pub r0: Option<f64>,
    /// Radius of the ball whose mass is tracked.
    pub ball_radius: f64,
    pub t_end: Option<f64>,
    pub per_decade: u32,
    /// Outer radius of tabulation and grid.
    pub domain_radius: Option<f64>,
    /// Barenblatt resolution.
    pub cells: usize,
    /// Coarse resolution of the Barenblatt convergence pair (`K` and `2K`).
    pub convergence_cells: usize,
    pub tolerances: Tolerances,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            mass: 1.0,
            masses: vec![1.0, 10.0],
            r0: None,
            ball_radius: 1.0,
            t_end: None,
            per_decade: 10,
            domain_radius: None,
            cells: 2048,
            convergence_cells: 512,
            tolerances: Tolerances::default(),
        }
    }
}

impl ExperimentSettings {
    pub fn t_end_for(&self, kind: ExperimentKind) -> f64 {
        self.t_end.unwrap_or(match kind {
            ExperimentKind::Decay | ExperimentKind::Fsp => 1e6,
            ExperimentKind::Universal => 1e5,
            ExperimentKind::Blowup => 5.0,
            ExperimentKind::Barenblatt => 2.0,
        })
    }

    pub fn r0_for(&self, kind: ExperimentKind) -> f64 {
        self.r0.unwrap_or(match kind {
            ExperimentKind::Universal | ExperimentKind::Blowup => 0.5,
            _ => 1.0,
        })
    }

    pub fn domain_for(&self, kind: ExperimentKind) -> f64 {
        self.domain_radius.unwrap_or(match kind {
            ExperimentKind::Universal | ExperimentKind::Blowup => 1e14,
            _ => 1e5,
        })
    }
}

/// One row of a run's time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub sup: f64,
    pub support_radius: f64,
    pub mass: f64,
    /// Weighted mass in `B_R` for the configured ball radius (1 by default).
    pub mass_in_unit_ball: f64,
}

/// Power-law fits over the last 1.5 decades; absent when the window is too short.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Fits {
    pub window: Option<(f64, f64)>,
    pub decay_exponent: Option<f64>,
    pub decay_intercept: Option<f64>,
    pub decay_r2: Option<f64>,
    pub support_exponent: Option<f64>,
    pub support_intercept: Option<f64>,
    pub support_r2: Option<f64>,
}

/// One simulation inside an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub mass: f64,
    pub series: Vec<SeriesPoint>,
    pub fits: Fits,
    pub steps: u64,
    pub extensions: u32,
    pub truncated: bool,
    /// Most negative `u / sup` before clamping.
    pub worst_undershoot: f64,
    /// Largest relative mass change over observations with interior support.
    pub mass_drift: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    /// Absent when the quantity could not be computed.
    pub measured: Option<f64>,
    pub target: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the experiment kind, problem and resolved settings.
    pub config_hash: String,
    pub version: String,
    pub wall_time_s: f64,
}

/// Final-time profile of a Barenblatt run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileComparison {
    pub t: f64,
    /// `(cell center, numerical, exact cell average)`.
    pub rows: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub spec: ProblemConfig,
    pub settings: ExperimentSettings,
    pub runs: Vec<RunRecord>,
    /// Fits of the first run.
    pub fits: Fits,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
    /// Fitted envelope constants and predicted rates.
    pub constants: BTreeMap<String, f64>,
    /// Present when the verdict tests a proxy of the stated property.
    pub proxy: Option<String>,
    pub warnings: Vec<String>,
    pub profile: Option<ProfileComparison>,
    pub provenance: Provenance,
}

impl ExperimentResult {
    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

pub(crate) fn config_hash(kind: ExperimentKind, spec: &ProblemConfig, settings: &ExperimentSettings) -> Result<String> {
    let text = serde_json::to_string(&(kind, spec, settings))?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub(crate) fn version_string() -> String {
    format!("dnflow {}", env!("CARGO_PKG_VERSION"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.as_str().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!("nope".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn settings_deserialize_with_defaults() {
        let s: ExperimentSettings = serde_json::from_str(r#"{"masses": [1, 100]}"#).unwrap();
        assert_eq!(s.masses, vec![1.0, 100.0]);
        assert_eq!(s.per_decade, 10);
        assert_eq!(s.t_end_for(ExperimentKind::Blowup), 5.0);
    }

    #[test]
    fn hash_depends_on_settings() {
        let spec = ProblemConfig::euclidean(3, 2.0, 2.0, 0.0);
        let a = config_hash(ExperimentKind::Decay, &spec, &ExperimentSettings::default()).unwrap();
        let s = ExperimentSettings {
            mass: 2.0,
            ..Default::default()
        };
        let b = config_hash(ExperimentKind::Decay, &spec, &s).unwrap();
        assert_eq!(a.len(), 64);
        assert_ne!(a, b);
    }
}
