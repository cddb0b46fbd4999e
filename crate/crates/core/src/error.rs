use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sphere dimension must be at least 1, got {0}")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected} coordinates, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("integer overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty configuration: at least one point is required")]
    EmptyConfiguration,

    #[error("point has zero or non-finite norm")]
    DegeneratePoint,

    #[error("degenerate polynomial: {0}")]
    DegeneratePolynomial(String),

    #[error("unsupported dimension {d} for {what}; only d = 2 is implemented")]
    UnsupportedDimension { d: usize, what: &'static str },

    #[error(
        "internal inconsistency: monomial deviation {deviation:e} exceeds the kernel bound {bound:e}"
    )]
    Inconsistent { deviation: f64, bound: f64 },

    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("design source failed: {0}")]
    DesignSource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
