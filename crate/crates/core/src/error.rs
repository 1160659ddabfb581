use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular system: {0}")]
    Singular(String),

    /// An iterative routine stopped before meeting its tolerance. `best` is
    /// the best estimate available at that point.
    #[error("no convergence: {message} (best estimate {best})")]
    Convergence { message: String, best: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("degenerate regression: {0}")]
    Degenerate(String),

    #[error("estimation failed: {0}")]
    Estimation(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
