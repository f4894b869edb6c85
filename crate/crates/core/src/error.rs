use thiserror::Error;

use crate::model::Violation;
use crate::numeric::NumericError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Numeric(#[from] NumericError),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {}", join(.0))]
    Invalid(Vec<Violation>),

    /// A policy or adversary broke the engine's calling contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Construction parameters outside the documented range.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("instance too large for exhaustive search: {0}")]
    SizeLimit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
