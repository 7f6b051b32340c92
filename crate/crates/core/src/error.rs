//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by model construction, simulation and post-processing.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A dense representation would exceed the configured size limit.
    #[error("dense representation of {n_spins} spins exceeds the limit of {max_spins}")]
    Resource { n_spins: usize, max_spins: usize },

    /// A numerical routine failed or produced an unusable result.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Input data is inconsistent (mismatched grids, malformed files, ...).
    #[error("data error: {0}")]
    Data(String),

    /// The windowed peak search found no admissible maximum.
    #[error("no peak found around {center} with search windows up to {max_window}")]
    SearchFailure { center: f64, max_window: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
