//! Error type shared across the crate.

use std::fmt;

/// Errors produced by the numeric kernel and the geometry/scan layers.
#[derive(Debug)]
pub enum Error {
    /// Input outside the domain of an operation.
    Domain(String),
    /// Requested tolerance unreachable within the configured precision cap.
    NonConvergence(String),
    /// Simplex is degenerate (Gram rank < 4) where a full-rank one is required.
    SingularSimplex(String),
    /// Canonical-key quantization could not be stabilized within precision.
    KeyUnstable(String),
    /// Not enough certified digits for a sound rational reconstruction.
    PrecisionTooLow(String),
    /// Malformed textual input (rational, angle spec, config, cached value).
    Parse(String),
    /// Filesystem error from the cache or report writer.
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NonConvergence(msg) => write!(f, "non-convergence: {msg}"),
            Error::SingularSimplex(msg) => write!(f, "singular simplex: {msg}"),
            Error::KeyUnstable(msg) => write!(f, "key unstable: {msg}"),
            Error::PrecisionTooLow(msg) => write!(f, "precision too low: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
