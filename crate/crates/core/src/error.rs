use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("space order m must be at least 1")]
    InvalidOrder,

    #[error("invalid grid: N = {n}, m = {m} (need N >= 1 and N + 1 >= m)")]
    InvalidGrid { n: usize, m: usize },

    #[error("step h = {0} must satisfy 0 < h <= 1")]
    InvalidStep(f64),

    #[error("evaluation point z = {0} lies outside [0, 1]")]
    PointOutOfRange(f64),

    #[error("characteristic polynomial is not palindromic (relative deviation {0:.3e})")]
    NotPalindromic(f64),

    #[error("characteristic polynomial coefficients overflowed during expansion")]
    CoefficientOverflow,

    #[error("root iteration did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("expected {expected} roots inside the unit disk, found {found}")]
    RootCountMismatch { expected: usize, found: usize },

    #[error("polynomial derivative vanishes at a stable root (repeated root)")]
    DerivativeVanishes,

    #[error("linear system is singular (pivot {pivot:.3e} at step {step})")]
    SingularSystem { step: usize, pivot: f64 },

    #[error("boundary system is singular (pivot {pivot:.3e} at step {step})")]
    SingularBoundarySystem { step: usize, pivot: f64 },

    #[error("coefficients violate exactness constraint {row} by {deviation:.3e}")]
    ConstraintViolation { row: usize, deviation: f64 },

    #[error("squared error-functional norm is negative: {0:.3e}")]
    NegativeNorm(f64),

    #[error("sample set has {samples} values but the coefficient vector has {coeffs}")]
    GridMismatch { samples: usize, coeffs: usize },

    #[error("operation requires m = {expected}, got m = {got}")]
    WrongOrder { expected: usize, got: usize },

    #[error("non-finite sample value at index {0}")]
    NonFiniteSample(usize),
}
