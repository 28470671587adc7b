use crate::lattice::Vertex;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The computation needed lattice sites outside the configured bounding
    /// box. Usually the box was too small for the requested threshold, or the
    /// zero-density is at or above critical so growth never saturates.
    #[error("bounding box exhausted at {at:?}: {detail}")]
    BoxExhausted { at: Vertex, detail: String },

    /// A region with an empty lattice boundary was handed to an operation
    /// that targets that boundary.
    #[error("region has an empty lattice boundary")]
    EmptyBoundary,

    /// Not enough (or degenerate) data for a regression.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    /// Experiment spec failed validation (maps to CLI exit code 2).
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
