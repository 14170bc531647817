use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("query xi = {xi} lies outside the tabulated grid (last node {last}) and no tail exponent was declared")]
    Extrapolation { xi: f64, last: f64 },

    /// An iterative numerical procedure failed to reach its tolerance.
    /// `partial` is the best value available when it stopped.
    #[error("{what} did not converge (partial value {partial:e}, error estimate {error:e})")]
    NonConvergence {
        what: String,
        partial: f64,
        error: f64,
    },

    #[error("infinite mass: {0}")]
    InfiniteMass(String),

    /// The hypotheses of a bound fail, so the method yields no bound.
    #[error("no bound derivable: {0}")]
    NoBound(String),

    #[error("symbol is not weakly lower scaling with exponent > 1 on the tested range")]
    NotWlsc,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no signal: {0}")]
    NoSignal(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("schema mismatch in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn non_convergence(what: impl Into<String>, partial: f64, error: f64) -> Self {
        Error::NonConvergence {
            what: what.into(),
            partial,
            error,
        }
    }
}
