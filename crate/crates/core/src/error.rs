use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid of size {grid} cannot resolve {modes} sine modes")]
    UnderResolved { grid: usize, modes: usize },

    #[error("input is not odd: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NotOdd { residual: f64, tolerance: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time step produced a non-finite state at t = {time}")]
    StepFailure { time: f64 },

    #[error("time {time} lies beyond the guarded characteristic horizon {horizon}")]
    BeyondHorizon { time: f64, horizon: f64 },

    #[error("characteristic root finder failed at x = {x}, t = {t}")]
    RootFinder { x: f64, t: f64 },

    #[error("invalid attractor: {0}")]
    InvalidAttractor(String),

    #[error("optimal scaling is undefined for zero initial data")]
    ZeroData,

    #[error("series sum_n n^(-2(1-alpha)) diverges for alpha = {alpha}")]
    DivergentSeries { alpha: f64 },

    #[error("alpha = {alpha} is outside the supercritical range (0, 1/2)")]
    UnsupportedRegime { alpha: f64 },

    #[error("t = {t} lies outside the validity window (0, {window})")]
    OutsideValidity { t: f64, window: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed json: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
