use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported precision: {0}")]
    UnsupportedPrecision(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("problem file line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("truncation size n = {n} too small (need n >= {min})")]
    SizeTooSmall { n: usize, min: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero pivot in column {column}")]
    ZeroPivot { column: usize },

    #[error("singular triangular factor: zero diagonal at index {index}")]
    Singular { index: usize },

    #[error("dense diagnostics refused for n = {n} (cutoff {cutoff})")]
    DenseCutoff { n: usize, cutoff: usize },

    #[error("forward error bound inapplicable: eps * || |A^-1| E || = {0} >= 1")]
    BoundInapplicable(f64),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("argument {0} outside the validated range |x| <= 64")]
    OutOfRange(f64),

    #[error("reference solution unavailable: {0}")]
    MissingReference(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
