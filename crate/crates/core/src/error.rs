use alloc::string::String;
use core::fmt;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside the domain of an operation.
    Domain(&'static str),
    /// A density matrix failed validation.
    InvalidState(&'static str),
    /// A measured count rate lies above the paralyzable maximum `e^-1 / tau`.
    Saturated { measured: f64, max: f64 },
    /// Curve fit design matrix was singular.
    DegenerateFit,
    /// Too few sifted bits to estimate an error rate.
    InsufficientData { have: usize, need: usize },
    /// Mismatched lengths or an otherwise malformed protocol input.
    Protocol(&'static str),
    /// A classical message arrived out of the session grammar.
    Session(&'static str),
    /// A serialized message could not be decoded.
    Decode(&'static str),
    /// A configuration field violates its invariant. `field` is a dotted path.
    InvalidConfig { field: String, reason: &'static str },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::InvalidState(what) => write!(f, "invalid state: {what}"),
            Error::Saturated { measured, max } => {
                write!(f, "measured rate {measured} exceeds paralyzable maximum {max}; cannot be inverted")
            }
            Error::DegenerateFit => f.write_str("degenerate design matrix in curve fit"),
            Error::InsufficientData { have, need } => {
                write!(f, "insufficient data: {have} sifted bits, need at least {need}")
            }
            Error::Protocol(what) => write!(f, "protocol error: {what}"),
            Error::Session(what) => write!(f, "session error: {what}"),
            Error::Decode(what) => write!(f, "decode error: {what}"),
            Error::InvalidConfig { field, reason } => write!(f, "invalid {field}: {reason}"),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    pub(crate) fn invalid(field: &str, reason: &'static str) -> Self {
        Error::InvalidConfig { field: String::from(field), reason }
    }

    /// Prefixes the field path of an [`Error::InvalidConfig`] with `section.`.
    pub fn in_section(self, section: &str) -> Self {
        match self {
            Error::InvalidConfig { field, reason } => {
                let mut path = String::from(section);
                path.push('.');
                path.push_str(&field);
                Error::InvalidConfig { field: path, reason }
            }
            other => other,
        }
    }
}
