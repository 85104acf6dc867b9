use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("vertex {0} is not in the graph")]
    InvalidVertex(usize),
    #[error("clipped: {0}")]
    Clipped(String),
    #[error("empty: {0}")]
    Empty(String),
    #[error("field is bound to a different graph")]
    GraphMismatch,
    #[error("{0}")]
    Unsatisfiable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
