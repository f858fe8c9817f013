use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A CSV row could not be read or violated a record invariant.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid trade record: {0}")]
    InvalidRecord(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Nothing to average over: empty window, no surviving pairs, no valid windows.
    #[error("no data: {0}")]
    NoData(String),

    /// A denominator in a closed-form evaluator was zero.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config file: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    pub(crate) fn no_data(msg: impl Into<String>) -> Self {
        Error::NoData(msg.into())
    }
}
