use thiserror::Error;

/// Errors raised while validating data or running any stage of the estimator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("family `{0}` has no proband row")]
    MissingProband(String),
    #[error("family `{0}` has more than one proband row")]
    DuplicateProband(String),
    #[error("negative time {time} in family `{family_id}`")]
    NegativeTime { family_id: String, time: f64 },
    #[error("non-finite time in family `{0}`")]
    NonFiniteTime(String),
    #[error("invalid status {status} in family `{family_id}` (expected 0 or 1)")]
    InvalidStatus { family_id: String, status: i64 },
    #[error("dataset needs at least one case and one control family (n1={n1}, n0={n0})")]
    EmptyDataset { n1: usize, n0: usize },
    #[error("Kaplan-Meier input is empty")]
    EmptyInput,
    #[error("no relatives in the {0} group")]
    NoRelatives(&'static str),
    #[error("proband times are degenerate (fewer than two distinct values)")]
    DegenerateTimes,
    #[error("every relative event was skipped for group q={0}")]
    InsufficientData(u8),
    #[error("S0 and S1 are indistinguishable at s={s} (integral {denominator:e})")]
    DegenerateDependence { s: f64, denominator: f64 },
    #[error("bandwidth selection failed: {0}")]
    SelectionFailed(String),
    #[error("bootstrap confidence interval failed: {succeeded} of {attempted} replications succeeded")]
    CiFailed { succeeded: usize, attempted: usize },
    #[error("could not fill the {pool} pool within {budget} generated families")]
    PoolExhausted { pool: &'static str, budget: usize },
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
