use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects whose shapes must agree do not.
    #[error("dimension mismatch between {lhs} and {rhs}: {detail}")]
    Dimension {
        lhs: &'static str,
        rhs: &'static str,
        detail: String,
    },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Arguments that are individually valid but not in this combination.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// The semidefinite backend proved (or nearly proved) the problem infeasible.
    #[error("LMI problem infeasible (backend status: {status})")]
    Infeasible { status: String },

    #[error("numerical failure in solver: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(lhs: &'static str, rhs: &'static str, detail: impl Into<String>) -> Error {
    Error::Dimension {
        lhs,
        rhs,
        detail: detail.into(),
    }
}
