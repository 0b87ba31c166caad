//! Error type shared across the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by mesh handling, parameter derivation, assembly,
/// solvers and I/O.
#[derive(Debug)]
pub enum Error {
    /// A physical or numerical parameter violates its precondition.
    InvalidParameter { name: String, reason: String },
    /// A configuration key is unknown, malformed or inconsistent.
    Config { key: String, message: String },
    /// A mesh or data file could not be parsed.
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    /// An iterative solver failed to reach the requested tolerance.
    NoConvergence {
        iterations: usize,
        achieved: f64,
        tolerance: f64,
    },
    /// A linear system is structurally unsolvable (zero pivot/diagonal).
    SingularSystem { detail: String },
    /// A geometric entity is degenerate (zero-volume element, empty patch,
    /// empty region of interest).
    Degenerate { detail: String },
    /// Underlying I/O failure.
    Io(std::io::Error),
}

impl Error {
    pub fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub fn config(key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn degenerate(detail: impl Into<String>) -> Self {
        Error::Degenerate {
            detail: detail.into(),
        }
    }

    /// Process exit code for the CLI: 1 for validation problems,
    /// 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. } | Error::SingularSystem { .. } => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::Config { key, message } => write!(f, "config key `{key}`: {message}"),
            Error::Parse {
                path,
                line,
                message,
            } => write!(f, "{path}:{line}: {message}"),
            Error::NoConvergence {
                iterations,
                achieved,
                tolerance,
            } => write!(
                f,
                "solver did not converge after {iterations} iterations \
                 (residual {achieved:.3e}, requested {tolerance:.3e})"
            ),
            Error::SingularSystem { detail } => write!(f, "singular system: {detail}"),
            Error::Degenerate { detail } => write!(f, "degenerate input: {detail}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
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
