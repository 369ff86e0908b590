use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("too few samples: need at least 2, got {n}")]
    TooFewSamples { n: usize },

    #[error("invalid projection dimensions d = {d}, p = {p} (need 1 <= d <= p)")]
    InvalidDimensions { d: usize, p: usize },

    #[error("class '{label}' has {count} samples, need at least {required}")]
    TooFewSamplesForClass {
        label: String,
        count: usize,
        required: usize,
    },

    #[error("covariance of class '{label}' is singular")]
    SingularCovariance { label: String },

    #[error("reduced dimension d = {d} must be below the smallest class size {n_min}")]
    ReducedDimTooLarge { d: usize, n_min: usize },

    #[error("ensemble member {member}: covariance of class '{label}' is singular after {retries} redraws")]
    MemberDegenerate {
        member: usize,
        retries: usize,
        label: String,
    },

    #[error("dimension p = {p} is too small: {reason}")]
    DimensionTooSmall { p: usize, reason: String },

    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError {
        line: u64,
        column: usize,
        message: String,
    },

    #[error("missing value at line {line}, column {column}")]
    MissingValue { line: u64, column: usize },

    #[error("inconsistent row width at line {line}: expected {expected} fields, found {found}")]
    InconsistentWidth {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
