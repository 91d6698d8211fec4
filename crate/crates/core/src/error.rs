use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed image {path}: {reason}")]
    MalformedImage { path: PathBuf, reason: String },

    #[error("unsupported color format: {0}")]
    UnsupportedColor(String),

    #[error("unsupported bit depth: {0}")]
    UnsupportedDepth(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),

    #[error("seed conflict: {0}")]
    SeedConflict(String),

    #[error("invalid trimap: {0}")]
    InvalidTrimap(String),

    #[error("empty foreground after erosion (radius {radius}); try a smaller se_scale")]
    EmptyForeground { radius: usize },

    #[error("no background seed: dilated mask covers the whole image")]
    NoBackground,

    #[error("raters are disjoint: empty intersection")]
    DisjointRaters,

    #[error("grabcut produced an empty foreground")]
    EmptySegmentation,

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("ground truth contains a single class")]
    SingleClass,

    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
