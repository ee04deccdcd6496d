use thiserror::Error;

/// Coarse classification used by front ends to pick exit codes and messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCategory {
    Usage,
    Parse,
    Domain,
    UnsupportedFragment,
    InternalConsistency,
}

impl std::fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ErrorCategory::Usage => "usage",
            ErrorCategory::Parse => "parse",
            ErrorCategory::Domain => "domain",
            ErrorCategory::UnsupportedFragment => "unsupported-fragment",
            ErrorCategory::InternalConsistency => "internal-consistency",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid characteristic {0}: expected a prime in [2, 2^31]")]
    InvalidPrime(u64),
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("variable `{0}` is not mapped by the substitution")]
    UnmappedVariable(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("outside the exact monomial fragment: {0}")]
    Unsupported(String),
    #[error("center is not permissible: {0}")]
    NotPermissible(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
        expected: Vec<String>,
    },
    #[error("{0}")]
    Domain(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parse { .. } => ErrorCategory::Parse,
            Error::Unsupported(_) => ErrorCategory::UnsupportedFragment,
            Error::Internal(_) => ErrorCategory::InternalConsistency,
            _ => ErrorCategory::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
