use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing manifest: {0}")]
    MissingManifest(PathBuf),

    #[error("malformed manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },

    #[error("unknown layer kind {0:?}")]
    UnknownKind(String),

    #[error("layer {layer:?}: invalid axis roles: {reason}")]
    AxisRoles { layer: String, reason: String },

    #[error("layer {layer:?}: shape/data mismatch (shape implies {expected} values, found {actual})")]
    ShapeMismatch {
        layer: String,
        expected: usize,
        actual: usize,
    },

    #[error("layer {layer:?}: non-finite value at flat index {index}")]
    NonFinite { layer: String, index: usize },

    #[error("layer {layer_id}: decomposition failed: {reason}")]
    Decomposition { layer_id: usize, reason: String },

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("sample {sample} lies below xmin {xmin}")]
    SampleBelowXmin { sample: f64, xmin: f64 },

    #[error("every sample equals xmin; the exponent estimate diverges")]
    DegenerateTail,

    #[error("no matrices left to aggregate")]
    EmptyInclusion,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True when the error traces back to bad input rather than a failure
    /// inside the numerics.
    pub fn is_input(&self) -> bool {
        !matches!(
            self,
            Error::Decomposition { .. } | Error::EmptySpectrum | Error::EmptyInclusion
        )
    }
}
