use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("covariance matrix must be 2K x 2K, got {0} x {1}")]
    BadShape(usize, usize),

    #[error("covariance matrix is not positive definite (smallest eigenvalue {0:e})")]
    NonPositiveDefinite(f64),

    #[error("symplectic eigenvalue {0} violates the uncertainty bound 1/4")]
    UncertaintyViolation(f64),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("overlap exponent s = {0} is outside [0, 1]")]
    SOutOfRange(f64),

    #[error("overlap matrix is numerically singular (condition number {0:e})")]
    SingularOverlap(f64),

    #[error("truncation deficit {deficit:e} exceeds threshold {threshold:e}")]
    Truncation { deficit: f64, threshold: f64 },

    #[error("infeasible oracle request: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
