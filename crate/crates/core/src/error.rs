use thiserror::Error;

use crate::model::ValidationReport;

/// Errors raised by the library.
///
/// Invariant violations found by [`crate::model::validate_problem`] are data, not
/// errors; they only become an [`Error::InvalidProblem`] when an operation needs a
/// well-formed problem to proceed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid exponent {0}: must be positive or \"inf\"")]
    InvalidExponent(f64),

    #[error("invalid problem:\n{0}")]
    InvalidProblem(ValidationReport),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported problem shape: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}
