use thiserror::Error;

/// Errors produced anywhere in the kink estimation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid kernel order {0}: must be >= 1")]
    InvalidOrder(i64),
    #[error("unsupported derivative order {0}: must be in 0..=3")]
    UnsupportedDerivative(usize),
    #[error("point t = {t} outside the admissible interval ({lo}, {hi})")]
    Boundary { t: f64, lo: f64, hi: f64 },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported dependence regime: {0}")]
    Regime(String),
    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("kink at {0} is not in the interior of the design support")]
    DegenerateKink(f64),
    #[error("missing latent variable: {0}")]
    MissingLatent(&'static str),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("profile is flat on the search interval; no extrema")]
    NoExtrema,
    #[error("study invalid: {0}")]
    StudyInvalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
