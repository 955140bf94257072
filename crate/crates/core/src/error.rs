use thiserror::Error;

/// Errors raised by every layer of the framework.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// `line` is 1-based; 0 means the value did not come from a file line.
    #[error("config error{}: {message}", if *line == 0 { String::new() } else { format!(" at line {line}") })]
    Config { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim_check(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::InvalidArgument(format!("{what}: expected length {expected}, got {got}")));
    }
    Ok(())
}

pub(crate) fn finite_check(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("{what} contains non-finite values")));
    }
    Ok(())
}
