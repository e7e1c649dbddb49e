// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: String, reason: String },

    #[error("integration failed at tau = {tau}: {reason}")]
    IntegrationFailure { tau: f64, reason: String },

    #[error(
        "exact solver capacity exceeded: joint dimension {dim} > {limit}; use the mean-field solver"
    )]
    Capacity { dim: usize, limit: usize },

    #[error(
        "ensemble {ensemble} not converged: spread {spread:.3e} over the final window exceeds {tol:.1e}; increase tau_max"
    )]
    NotConverged {
        ensemble: usize,
        spread: f64,
        tol: f64,
    },

    #[error("ensemble {ensemble} never reached {target:.6}")]
    NotReached { ensemble: usize, target: f64 },

    #[error("cumulant closure unsupported for operator monomial of degree {degree}")]
    UnsupportedClosure { degree: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
