use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid base {0}: must be at least 2")]
    InvalidBase(u32),
    #[error("base {base} is not prime")]
    NotPrime { base: u32 },
    #[error("precision {precision} too large for base {base}: b^m must fit in 64 bits")]
    PrecisionTooLarge { base: u32, precision: u32 },
    #[error("numerator {value} out of range [0, {base}^{precision})")]
    NumeratorOutOfRange { value: u64, base: u32, precision: u32 },
    #[error("digit {digit} out of range for base {base}")]
    DigitOutOfRange { digit: u32, base: u32 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point set has {found} points but a net needs b^m = {expected}")]
    NotNetSized { expected: u64, found: usize },
    #[error("invalid wavelet index: {0}")]
    InvalidIndex(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numeric budget exceeded: {0}")]
    Budget(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
