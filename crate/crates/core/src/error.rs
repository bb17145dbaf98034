use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied an argument outside the operation's domain.
    #[error("invalid argument: {0}")]
    Usage(String),

    /// The requested formula does not apply in this regime.
    #[error("formula not applicable: {0}")]
    Domain(String),

    #[error("calibration infeasible: {0}")]
    Infeasible(String),

    /// A count does not fit in the integer type used to represent it.
    #[error("size overflow: {0}")]
    Size(String),

    #[error("enumeration of {needed} subsets exceeds budget {budget}")]
    Budget { needed: u128, budget: u128 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("degenerate estimate: {0}")]
    Degenerate(String),

    #[error("malformed instance: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
