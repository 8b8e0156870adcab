use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid register configuration: {0}")]
    InvalidConfig(String),

    #[error("basis index {index} out of range 1..={max}")]
    InvalidState { index: usize, max: usize },

    #[error("qubit index {index} out of range 1..={n}")]
    InvalidQubit { index: usize, n: usize },

    #[error("invalid level pair ({i}, {j}): {reason}")]
    InvalidPair { i: usize, j: usize, reason: String },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("amplitude vector has length {got}, expected {expected}")]
    Shape { expected: usize, got: usize },

    #[error("non-finite amplitude produced at tau = {tau}")]
    Blowup { tau: f64 },

    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    Normalization { norm_sqr: f64 },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid value for `{field}`: {msg}")]
    Validation { field: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Blowup { .. } => 3,
            Error::Io { .. } => 4,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn validation(field: &str, msg: impl Into<String>) -> Self {
        Error::Validation { field: field.to_string(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
