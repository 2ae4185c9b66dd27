use thiserror::Error;

/// Errors raised by the bound, sampling and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to converge.
    #[error("numerical error in {routine}: {detail}")]
    Numerical {
        routine: &'static str,
        detail: String,
    },

    /// Monte Carlo request cannot resolve the requested tail levels.
    #[error("infeasible Monte Carlo request: {detail}; feasible x range: {feasible}")]
    Infeasible { detail: String, feasible: String },

    /// Malformed tabulated input (CSV tails and similar).
    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            routine,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
