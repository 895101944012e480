use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input locations")]
    EmptyInput,

    #[error("empty series")]
    EmptySeries,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("timestamps must be strictly increasing (index {index}: {previous} then {current})")]
    NonIncreasingTime { index: usize, previous: f64, current: f64 },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("covariance not positive definite")]
    NotPositiveDefinite,

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("zero variance")]
    ZeroVariance,

    #[error("degenerate weight at index {index}: {value}")]
    DegenerateWeight { index: usize, value: f64 },

    #[error("invalid feature record from {source_id}: {reason}")]
    RejectedRecord { source_id: String, reason: String },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("unparseable values in {path} at rows {rows:?}")]
    BadRows { path: PathBuf, rows: Vec<usize> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed message: {0}")]
    Protocol(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("node {node_id}: {source}")]
    Node {
        node_id: String,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad configuration, usage, missing files, protocol violations.
    Config,
    /// The data itself cannot be used (empty, constant, unparseable).
    Data,
    /// Linear algebra or optimizer failure.
    Numerical,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Node { source, .. } => source.category(),
            Error::NotPositiveDefinite | Error::DegenerateWeight { .. } => ErrorCategory::Numerical,
            Error::EmptyInput
            | Error::EmptySeries
            | Error::NonIncreasingTime { .. }
            | Error::NonFinite { .. }
            | Error::InsufficientData { .. }
            | Error::ZeroVariance
            | Error::BadRows { .. }
            | Error::Csv { .. } => ErrorCategory::Data,
            Error::DimensionMismatch(_)
            | Error::InvalidParameter { .. }
            | Error::RejectedRecord { .. }
            | Error::Io { .. }
            | Error::Protocol(_)
            | Error::Config(_) => ErrorCategory::Config,
        }
    }

    pub(crate) fn at_node(self, node_id: &str) -> Error {
        Error::Node {
            node_id: node_id.to_string(),
            source: Box::new(self),
        }
    }
}
