use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A value object was built with an out-of-range field.
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    /// An iterative evaluation did not reach its tolerance.
    #[error("{op} did not converge after {terms} terms (partial value {partial:e})")]
    NonConvergence {
        op: &'static str,
        terms: usize,
        partial: f64,
    },

    /// A computed quantity violated a structural bound.
    #[error("internal consistency failure in {op}: {reason}")]
    Consistency { op: &'static str, reason: String },

    /// A grid point of an optimisation run failed.
    #[error("objective failed at alpha={alpha}, beta={beta}")]
    GridPoint {
        alpha: f64,
        beta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("model file error: {0}")]
    Model(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Coarse classification used by front ends to pick an exit status.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain { .. } | Error::Validation { .. } | Error::Config(_) => {
                ErrorKind::Config
            }
            Error::NonConvergence { .. } | Error::Consistency { .. } => ErrorKind::Numeric,
            Error::GridPoint { source, .. } => source.kind(),
            Error::Model(_) | Error::Dataset(_) | Error::Io { .. } => ErrorKind::Io,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numeric,
    Io,
}
