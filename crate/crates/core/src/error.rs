use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the toolkit reports.
///
/// Contract violations (dimension mismatches, support violations, singular
/// directions) are kept apart from malformed input so the command-line front
/// end can map them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular direction: the covector (mu, nu) must be nonzero")]
    SingularDirection,

    #[error("offset {offset} lies outside the tomogram support [-{limit}, {limit}]")]
    OutOfSupport { offset: f64, limit: f64 },

    #[error("insufficient support: {0}")]
    InsufficientSupport(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DimensionMismatch { .. } => ErrorKind::DimensionMismatch,
            Error::SingularDirection => ErrorKind::SingularDirection,
            Error::OutOfSupport { .. } => ErrorKind::OutOfSupport,
            Error::InsufficientSupport(_) => ErrorKind::InsufficientSupport,
            Error::InvalidParameter(_) => ErrorKind::InvalidParameter,
            Error::Unsupported(_) => ErrorKind::Unsupported,
            Error::Parse { .. } => ErrorKind::Parse,
            Error::Io(_) => ErrorKind::Io,
        }
    }

    /// True when the error is a numerical-contract violation rather than bad
    /// input or an I/O failure.
    pub fn is_contract_violation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::SingularDirection
                | Error::OutOfSupport { .. }
                | Error::InsufficientSupport(_)
                | Error::Unsupported(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    DimensionMismatch,
    SingularDirection,
    OutOfSupport,
    InsufficientSupport,
    InvalidParameter,
    Unsupported,
    Parse,
    Io,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::DimensionMismatch => "dimension_mismatch",
            ErrorKind::SingularDirection => "singular_direction",
            ErrorKind::OutOfSupport => "out_of_support",
            ErrorKind::InsufficientSupport => "insufficient_support",
            ErrorKind::InvalidParameter => "invalid_parameter",
            ErrorKind::Unsupported => "unsupported",
            ErrorKind::Parse => "parse",
            ErrorKind::Io => "io",
        };
        f.write_str(s)
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
