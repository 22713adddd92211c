use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected}, got {actual} ({context})")]
    SizeMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("template mask is identically zero outside the DC bin")]
    ZeroTemplate,

    #[error("iteration diverged: non-finite value in `{iterate}` at iteration {iteration}")]
    Divergence { iterate: &'static str, iteration: usize },

    #[error("metric does not dominate alpha*AᵀA: D-seminorm radicand {radicand:e}")]
    DominanceViolation { radicand: f64 },

    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("shape mismatch in {path}: {reason}")]
    ShapeMismatch { path: PathBuf, reason: String },

    #[error("truncated payload in {path}: expected {expected} bytes, found {found}")]
    Truncated {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_len(expected: usize, actual: usize, context: &'static str) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::SizeMismatch {
            expected,
            actual,
            context,
        })
    }
}
