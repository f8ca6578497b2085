use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Input(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("middle-graph mismatch: {0}")]
    MiddleGraph(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("closure cap exceeded ({0})")]
    Cap(usize),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
