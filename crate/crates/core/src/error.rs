use std::io;

use thiserror::Error;

/// Errors raised by the finite-element, filtering and optimization routines.
#[derive(Debug, Error)]
pub enum TopOptError {
    /// An argument is out of range or has the wrong length.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The reduced stiffness system is singular, usually from missing supports.
    #[error("structural error: {0}")]
    Structural(String),

    /// An iterative procedure failed to reach its tolerance.
    #[error("numerical error: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    /// The volume target cannot be met within the density bounds.
    #[error("constraint error: {0}")]
    Constraint(String),

    /// A design is in a state the operation does not accept.
    #[error("state error: {0}")]
    State(String),

    #[error("configuration error at line {line}, key `{key}`: {message}")]
    Config {
        key: String,
        line: usize,
        message: String,
    },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = TopOptError> = std::result::Result<T, E>;

pub(crate) fn check_len(what: &str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(TopOptError::Parameter(format!(
            "{what} has length {got}, expected {expected}"
        )))
    }
}
