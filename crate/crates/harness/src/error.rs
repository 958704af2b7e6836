use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Core(repbandit::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {reason}")]
    Parse { what: &'static str, reason: String },

    #[error("{0}")]
    Records(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl From<repbandit::Error> for HarnessError {
    fn from(e: repbandit::Error) -> Self {
        match e {
            repbandit::Error::Config { field, reason } => HarnessError::Config {
                field: field.to_string(),
                reason,
            },
            other => HarnessError::Core(other),
        }
    }
}

pub(crate) fn config_err(field: &str, reason: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}

/// Machine-readable form printed by the CLI on failure.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

impl HarnessError {
    pub fn report(&self) -> ErrorReport {
        let (kind, field) = match self {
            HarnessError::Config { field, .. } => ("config", Some(field.clone())),
            HarnessError::Core(repbandit::Error::HorizonTooShort { .. }) => ("horizon_too_short", None),
            HarnessError::Core(_) => ("numerical", None),
            HarnessError::Io { .. } => ("io", None),
            HarnessError::Parse { .. } => ("parse", None),
            HarnessError::Records(_) => ("records", None),
        };
        ErrorReport {
            error: kind,
            field,
            message: self.to_string(),
        }
    }
}
