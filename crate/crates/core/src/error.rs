use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

/// Failures reported by a robustness oracle session.
///
/// Cancellation is not an error: a cancelled query yields
/// [`OracleAnswer::Cancelled`](crate::oracle::OracleAnswer::Cancelled).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("unsupported oracle configuration: {0}")]
    Unsupported(String),
    #[error("enumeration cap of {cap} candidates exceeded")]
    ResourceLimit { cap: u64 },
    #[error("oracle backend failed: {0}")]
    Backend(String),
    #[error("oracle backend exited: {0}")]
    BackendExited(String),
    #[error("oracle protocol violation: {0}")]
    Protocol(String),
    #[error("oracle handshake mismatch: {0}")]
    Handshake(String),
    #[error("oracle query timed out after {0:?}")]
    Timeout(Duration),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model error: {0}")]
    Model(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    /// No adversarial example exists within the ball: there is no d-CXp and
    /// the unique d-AXp is the empty set.
    #[error("epsilon too small: no d-CXp; d-AXp = {{}}")]
    NoAdvExample { oracle_calls: u64 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
