use std::path::PathBuf;

use thiserror::Error;

/// Configuration problems, reported against the offending field.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("cannot parse {value:?} for {field}")]
    Parse { field: String, value: String },
    #[error("unknown field {0:?}")]
    UnknownField(String),
}

impl ConfigError {
    pub fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// The field this error refers to, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } | ConfigError::Parse { field, .. } => Some(field),
            ConfigError::UnknownField(name) => Some(name),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChannelError {
    #[error("AR order {0} is not supported (only order 1)")]
    UnsupportedOrder(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(
        "instance too large for exhaustive search: {n_users} users, {n_bands} bands, \
         {ell} bands per user, {states} joint states (limits: 6 users, 4 bands, 2 bands per user, 1000000 states)"
    )]
    TooLarge {
        n_users: usize,
        n_bands: usize,
        ell: usize,
        states: u128,
    },
    #[error("instance shape mismatch: {0}")]
    Shape(String),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Format {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("sweep groups differ in non-swept field {field:?}")]
    MixedConfigs { field: String },
    #[error("sweep needs at least one group")]
    EmptySweep,
}

impl IoError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.into(),
            source,
        }
    }
}
