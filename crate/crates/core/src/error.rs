use thiserror::Error;

use crate::quantum::GameValueReport;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input (dimension mismatch, unknown register, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// An iterative procedure hit its cap without meeting its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        report: Option<Box<GameValueReport>>,
    },

    /// Size or arithmetic limits exceeded.
    #[error("out of range: {0}")]
    Range(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Partial report carried by a convergence failure, if any.
    pub fn report(&self) -> Option<&GameValueReport> {
        match self {
            Error::Convergence { report, .. } => report.as_deref(),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
