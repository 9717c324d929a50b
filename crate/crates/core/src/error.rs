//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: wrong shapes, non-finite entries, out-of-range parameters.
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    /// IR SINR target below the lower bound `2^r - 1`.
    #[error("gamma0 = {gamma0} is below the lower bound {lower} implied by the secrecy target")]
    Domain { gamma0: f64, lower: f64 },

    #[error("scheme {scheme} is not applicable: {reason}")]
    SchemeInapplicable { scheme: &'static str, reason: String },

    /// The target is out of reach for a particular suboptimal design even
    /// though the joint problem may still be feasible.
    #[error("scheme {scheme} cannot meet secrecy target {target}: {reason}")]
    SchemeInfeasible {
        scheme: &'static str,
        target: f64,
        reason: String,
    },

    #[error("secrecy target {target} bits/s/Hz exceeds the achievable maximum {r_max}")]
    Infeasible { target: f64, r_max: f64 },

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("conic solver failed at gamma0 = {gamma0}: {detail}")]
    Solver { gamma0: f64, detail: String },

    #[error("solution is not in the expected state: {0}")]
    State(String),

    #[error("rank-one reconstruction failed: {detail} (eigenvalues {eigenvalues:?})")]
    Reconstruction { detail: String, eigenvalues: Vec<f64> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
