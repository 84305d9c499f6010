use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the library. Data-model violations detected by
/// [`crate::strata::validate`] are reported as values, not errors; this type
/// covers misuse of an operation's contract.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability {0} is outside the open interval (0, 1)")]
    Probability(f64),

    #[error("{0}")]
    Domain(String),

    #[error("population is invalid: {0}")]
    InvalidPopulation(String),

    #[error("population has no strata")]
    EmptyPopulation,

    #[error("stratum '{label}': {arm} arm is empty")]
    EmptyArm { label: String, arm: &'static str },

    #[error("unknown stratum label '{0}'")]
    UnknownLabel(String),

    #[error("dataset does not align with population: {0}")]
    Alignment(String),

    #[error("expected exactly {expected} strata, found {found}")]
    StrataCount { expected: usize, found: usize },

    #[error("trial count {n} exceeds the enumeration guard {max}")]
    EnumerationGuard { n: u64, max: u64 },

    #[error("grid point {index} is invalid: {reason}")]
    GridPoint { index: usize, reason: String },

    #[error("invalid simulation config: {0}")]
    SimConfig(&'static str),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
