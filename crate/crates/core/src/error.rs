use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid derivative order {r} for degree {p} (need r <= p)")]
    InvalidOrder { p: usize, r: usize },

    #[error("degree must be at least 1, got {0}")]
    InvalidDegree(usize),

    #[error("size n = {n} is too small: need n >= {min} ({reason})")]
    SizeTooSmall { n: usize, min: usize, reason: &'static str },

    #[error("{kind} structure for p = {p} requires n >= {formula} = {min}, got n = {n}")]
    BelowThreshold { kind: &'static str, p: usize, n: usize, min: usize, formula: &'static str },

    #[error("reduced spline space is only defined here for even degree, got p = {0}")]
    ReducedOddDegree(usize),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular matrix: eigenvalue {index} is {value:e}")]
    Singular { index: usize, value: f64 },

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension {dim}: {source}")]
    InDimension {
        dim: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
