use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} outside tabulated range [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("assumption violated: {0}")]
    InvalidAssumption(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("time step underflow: dt = {dt:e} at t = {t:e}")]
    Stiffness { dt: f64, t: f64 },
    #[error("scheme failure: cell {cell} undershoot {value:e} (sup {sup:e})")]
    SchemeFailure { cell: usize, value: f64, sup: f64 },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn range(what: &'static str, value: f64, lo: f64, hi: f64) -> Self {
        Error::Range { what, value, lo, hi }
    }
}
