use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A density is singular at the requested point (coincident points with r <= 1).
    #[error("singular density: {0}")]
    Singular(String),

    /// An iterative numeric routine did not reach its tolerance.
    #[error("numeric error: {message} (best estimate {estimate}, error bound {error_bound})")]
    Numeric {
        message: String,
        estimate: f64,
        error_bound: f64,
    },

    /// Invalid experiment configuration; `field` names the offending entry.
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// Malformed textual input (expressions, CSV).
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    /// A sampler produced coincident points twice in a row.
    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: msg.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
