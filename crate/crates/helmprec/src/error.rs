//! Error type shared by every module of the toolkit.

use thiserror::Error;

/// Errors produced by grid construction, media builders, operator
/// application, plan building and the solvers.
///
/// Every variant carries the name of the operation that failed so the
/// CLI can surface a one-line diagnostic.
#[derive(Debug, Error)]
pub enum HelmError {
    /// A precondition on the arguments was violated.
    #[error("{op}: invalid argument: {msg}")]
    InvalidArgument { op: &'static str, msg: String },

    /// A media field violates the model invariants (e.g. the wave speed
    /// is not constant on the support of the absorbing-layer profile).
    #[error("{op}: invalid media: {msg}")]
    InvalidMedia { op: &'static str, msg: String },

    /// The symbol denominator vanished; the reciprocal is undefined.
    #[error("{op}: singular symbol: |denominator| = {denom_abs:e}")]
    SingularSymbol { op: &'static str, denom_abs: f64 },

    /// An assembled operator has an eigenvalue of (numerically) zero
    /// modulus, so the spectral condition number is undefined.
    #[error("{op}: singular operator: min eigenvalue modulus = {min_abs:e}")]
    SingularOperator { op: &'static str, min_abs: f64 },

    /// A user-supplied operator produced non-finite values.
    #[error("{op}: operator failure: {msg}")]
    OperatorFailure { op: &'static str, msg: String },

    /// A dense-oracle routine failed inside LAPACK.
    #[error("{op}: dense linear algebra failed: {msg}")]
    DenseBackend { op: &'static str, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HelmError {
    pub fn invalid_argument(op: &'static str, msg: impl Into<String>) -> Self {
        HelmError::InvalidArgument { op, msg: msg.into() }
    }

    pub fn invalid_media(op: &'static str, msg: impl Into<String>) -> Self {
        HelmError::InvalidMedia { op, msg: msg.into() }
    }
}

pub type Result<T, E = HelmError> = std::result::Result<T, E>;
