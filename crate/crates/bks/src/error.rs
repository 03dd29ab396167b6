//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user input: unknown type letter, rank out of range, bad level, etc.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A mathematical consistency check failed (these indicate a bug or a
    /// corrupted cache, not bad user input).
    #[error("internal check failed: {0}")]
    Check(String),

    /// A configured resource cap (e.g. maximum Weyl group size) was exceeded.
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
