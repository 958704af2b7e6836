use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension for {what}: {value}")]
    InvalidDimension { what: &'static str, value: usize },

    #[error("invalid rank {k}: must satisfy 1 <= k <= {max}")]
    InvalidRank { k: usize, max: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("least-squares design matrix is rank deficient")]
    SingularDesign,

    #[error("{0} requires at least one sample")]
    EmptySamples(&'static str),

    #[error("action norm {norm} exceeds the unit ball")]
    InfeasibleAction { norm: f64 },

    #[error("task index {index} out of range for {count} tasks")]
    TaskIndex { index: usize, count: usize },

    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("horizon too short: {needed} pulls needed but T = {horizon}")]
    HorizonTooShort { needed: u64, horizon: u64 },

    #[error("basis is not orthonormal (max deviation {deviation})")]
    NotOrthonormal { deviation: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Config {
        field,
        reason: reason.into(),
    }
}
