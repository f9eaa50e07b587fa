//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A request exceeds a hard capacity limit (e.g. 2^L state vectors).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A configuration, profile, or preset is malformed.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A series or iteration does not converge for the given parameters.
    #[error("series does not converge: {0}")]
    Divergence(String),

    /// A numerical procedure failed (non-convergence, NaN, zero amplitude).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A linear solve hit an ill-conditioned or singular system; the
    /// eigenvalues of the regularized matrix are attached for diagnosis.
    #[error("ill-conditioned linear system: {detail}; spectrum {spectrum:?}")]
    Conditioning { detail: String, spectrum: Vec<f64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 capacity, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Config(_) | Error::Io(_) | Error::Json(_)
            | Error::Toml(_) => 2,
            Error::Capacity(_) => 3,
            Error::Divergence(_) | Error::Numerical(_) | Error::Conditioning { .. } => 4,
        }
    }
}
