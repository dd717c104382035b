use thiserror::Error;

/// Errors raised by profile construction, the averaging kernels and the operators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("profile needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("duplicate breakpoint at t = {0}")]
    DuplicateBreakpoint(f64),
    #[error("breakpoint t = {t} lies outside the {domain} domain")]
    OutsideDomain { t: f64, domain: String },
    #[error("non-finite sample ({t}, {v})")]
    NonFinite { t: f64, v: f64 },
    #[error("nonzero boundary value {value} at t = {t}: {domain} profiles must vanish at their end")]
    NonzeroBoundary { t: f64, value: f64, domain: String },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("domain mismatch: {0} vs {1}")]
    DomainMismatch(String, String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("negative profile value {value} at t = {t}; apply abs_reduce first")]
    NegativeProfile { t: f64, value: f64 },
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("no dyadic certificate: {0}")]
    NoCertificate(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
