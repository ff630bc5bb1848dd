//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by mesh generation, assembly and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is out of range or inconsistent.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Mesh construction or a mesh consistency check failed.
    #[error("mesh error: {0}")]
    Mesh(String),
    /// A factorization or eigen-decomposition failed.
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    /// A linear or local solve failed in a way that invalidates the result.
    #[error("solver failure: {0}")]
    Solver(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
