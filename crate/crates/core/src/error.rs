use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite field")]
    NonFinite,
    #[error("invalid exponent {0}: expected p >= 1")]
    InvalidExponent(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("incompatible Poisson data: mean {mean:e} exceeds tolerance {tol:e}")]
    IncompatiblePoisson { mean: f64, tol: f64 },
    #[error("eigen-solver failure for {0} operator")]
    EigenSolver(&'static str),
    #[error("time must be {0}")]
    InvalidTime(&'static str),
    #[error("input not solenoidal (relative divergence {0:e})")]
    NotSolenoidal(f64),
    #[error("iteration not contracting; reduce T (ratios {0:?})")]
    NotContracting(Vec<f64>),
    #[error("blow-up or instability at t = {t}; reduce dt")]
    BlowUp { t: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
