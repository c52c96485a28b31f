use thiserror::Error;

/// Errors raised by the arena model, payoff evaluation and the solvers.
///
/// Variants split into two families: input problems (malformed documents,
/// parameters out of range, unsupported arena classes) and solver failures
/// (iteration caps, budgets). [`Error::is_input_error`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid arena: {0}")]
    Semantic(String),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("strategy does not match arena: {0}")]
    StrategyMismatch(String),
    #[error("unsupported arena class: {0}")]
    UnsupportedClass(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}

impl Error {
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::Semantic(_)
                | Error::Parameter(_)
                | Error::StrategyMismatch(_)
                | Error::UnsupportedClass(_)
        )
    }

    /// Stable short tag used in one-line diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::Semantic(_) => "semantic",
            Error::Parameter(_) => "parameter",
            Error::StrategyMismatch(_) => "strategy",
            Error::UnsupportedClass(_) => "unsupported",
            Error::NonConvergence(_) => "non-convergence",
            Error::Budget(_) => "budget",
            Error::Overflow(_) => "overflow",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
