use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-domain input (points, matrices, queries).
    #[error("invalid input: {0}")]
    Input(String),
    /// A model or combinator was built with parameters outside its restrictions.
    #[error("invalid model: {0}")]
    Construction(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The request is well-formed but exceeds what the method can do exactly.
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn construction<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Construction(msg.into()))
}
