use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not an odd prime (supported range 3 <= q < 2^31)")]
    NotOddPrime(u64),

    #[error("operands belong to different fields (q = {left} and q = {right})")]
    FieldMismatch { left: u64, right: u64 },

    #[error("inverse of zero")]
    ZeroInverse,

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("{0} is a gap of the Weierstrass semigroup, not a pole number")]
    NotAPoleNumber(u64),

    #[error("functions in L(kP_inf) cannot be evaluated at the place at infinity")]
    EvaluateAtInfinity,

    #[error("matrix is singular: rank {rank}, expected {expected}")]
    Singular { rank: usize, expected: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("{count} square submatrices to check exceeds the cap of {cap}")]
    TooManySubmatrices { count: u128, cap: u128 },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("unsupported parameters: {0}")]
    UnsupportedParameters(String),

    #[error("q = {q} yields only {available} candidate places with distinct x, need at least {required}")]
    TooFewPlaces {
        q: u64,
        available: usize,
        required: usize,
    },

    #[error(
        "secrecy audit state space of {states} exceeds the cap of {cap}; use smaller parameters"
    )]
    StateSpaceTooLarge { states: u128, cap: u128 },

    #[error("invalid collusion set: {0}")]
    InvalidCollusion(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
