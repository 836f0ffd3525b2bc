use thiserror::Error;

/// Errors raised by the mechanism, the bound evaluators and the simulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cost vector must contain at least one machine")]
    EmptyCosts,
    #[error("cost at index {index} must be positive and finite, got {value}")]
    InvalidCost { index: usize, value: String },
    #[error("{n} machines exceeds the supported maximum of {max}")]
    TooManyMachines { n: usize, max: usize },
    #[error("machine index {index} out of range for {n} machines")]
    MachineIndex { index: usize, n: usize },
    #[error("declared cost must be positive and finite, got {0}")]
    InvalidDeclaration(String),
    #[error("deviation grid is empty")]
    EmptyGrid,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("probabilities sum to {sum}, outside tolerance")]
    Inconsistent { sum: String },
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// Whether the error stems from bad caller input rather than an internal numeric problem.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Inconsistent { .. } | Error::Numeric(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
