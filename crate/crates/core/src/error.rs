use thiserror::Error;

/// Errors raised by the filter, metrics and harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("input size {size} exceeds limit {limit}")]
    SizeLimit { size: usize, limit: usize },

    #[error("gain ratio undefined for a zero basic OSPA")]
    UndefinedGainRatio,

    #[error("cannot resample a particle set with zero total mass")]
    ZeroMass,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
