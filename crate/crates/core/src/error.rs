use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A geometric series or closed-form denominator does not converge.
    #[error("divergence: {0}")]
    Divergence(String),

    /// An iterative numeric routine failed to converge.
    #[error("numeric failure: {message} (after {iterations} iterations, last bracket [{lo}, {hi}])")]
    Numeric {
        message: String,
        iterations: usize,
        lo: f64,
        hi: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn divergence(msg: impl Into<String>) -> Error {
    Error::Divergence(msg.into())
}
