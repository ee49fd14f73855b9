use thiserror::Error;

/// Errors produced by the numerical and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A matrix required to be Hermitian deviates from its adjoint.
    #[error("matrix is not Hermitian (max |A - A^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    /// NaN or infinity in an input.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Cholesky pivot fell below the singularity threshold.
    #[error("matrix is numerically singular (pivot {pivot:e} below {threshold:e})")]
    Singular { pivot: f64, threshold: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A request would exceed a hard size limit (enumeration or codebook size).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
