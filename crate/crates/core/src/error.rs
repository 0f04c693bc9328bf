use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive semi-definite: eigenvalue {eigenvalue:e} below tolerance {tolerance:e}")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("{what} = {value:e} exceeds the admissible bound {limit:e}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("round {round}: dual norm of the loss is {value:e}, the learner requires at most 1")]
    DualNormViolation { round: usize, value: f64 },

    #[error("accumulated gradient has a component outside the range of the norm matrix")]
    OutsideRange,

    #[error("feature vector required: {0}")]
    MissingFeature(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trace of the matrix square root is zero")]
    ZeroTrace,

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
