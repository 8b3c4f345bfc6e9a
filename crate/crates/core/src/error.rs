//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path:?} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("missing attribute: {0}")]
    MissingAttribute(String),

    #[error("crop removed every vertex (degenerate crop box)")]
    DegenerateCrop,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rank-deficient normal system: ranking regression has no unique solution with zero regularizer")]
    RankDeficient,

    #[error("window of {window} frames does not fit a sequence of {len} frames")]
    WindowTooLarge { window: usize, len: usize },

    #[error("sequence too short: {0}")]
    TooShort(String),

    #[error("training set is missing class {0} (all six classes must be present)")]
    MissingClass(u8),

    #[error("pipeline stage `{stage}` failed at {coords}: {source}")]
    Stage {
        stage: &'static str,
        coords: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an error with the pipeline stage and (n, theta, t)-style coordinates
    /// where it occurred.
    pub fn in_stage(self, stage: &'static str, coords: impl Into<String>) -> Error {
        Error::Stage {
            stage,
            coords: coords.into(),
            source: Box::new(self),
        }
    }

    /// The stage name, if this error carries stage context.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
