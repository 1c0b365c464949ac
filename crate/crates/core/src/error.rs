use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands act on different qubit counts.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Input text could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A structural invariant of the input is violated.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The request exceeds a configured size cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A formula was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The stochastic search finished without a feasible result.
    #[error("search failure: {0}")]
    SearchFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
