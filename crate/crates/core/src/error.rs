use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the evaluation, quadrature and verification layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed argument: dimension mismatch, non-finite value, non-unitary matrix.
    #[error("invalid input: {0}")]
    Input(String),

    /// Request exceeds a configured evaluation cap (degree, imaginary part).
    #[error("capability exceeded: {0}")]
    Capability(String),

    /// Argument outside the region where the quantity is defined or resolvable.
    #[error("domain error: {0}")]
    Domain(String),

    /// Order-doubling test failed; both estimates are attached.
    #[error(
        "{what}: doubling test failed (order {coarse_order}: {coarse}, order {fine_order}: {fine}, relative change {change:.3e})"
    )]
    Accuracy {
        what: String,
        coarse_order: usize,
        fine_order: usize,
        coarse: String,
        fine: String,
        change: f64,
    },

    #[error("{path}: line {line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("configuration error in `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub(crate) fn capability(msg: impl Into<String>) -> Error {
    Error::Capability(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
