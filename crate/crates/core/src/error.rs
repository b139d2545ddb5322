use std::path::PathBuf;

use thiserror::Error;

use crate::cloud::RigidTransform;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter violates a precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two inputs that must agree in shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The input geometry does not constrain the requested estimate.
    #[error("degenerate input (rank {rank}): {context}")]
    DegenerateInput { rank: usize, context: String },

    /// RANSAC exhausted its budget without finding any inlier support.
    /// The best hypothesis (if any was evaluated) is kept for diagnostics.
    #[error("no consensus after {iterations} iterations (best inlier count {best_inliers})")]
    NoConsensus {
        iterations: usize,
        best_inliers: usize,
        best: Option<Box<RigidTransform>>,
    },

    /// A metric is undefined on the given input (e.g. RMSE over zero pairs).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// A loss component that must be finite is not.
    #[error("non-finite loss part: {0}")]
    NonFinitePart(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file. `line` is 1-based, `offset` is the byte
    /// position where the problem was detected.
    #[error("{source_name}:{line} (byte {offset}): {message}")]
    Parse {
        source_name: String,
        line: usize,
        offset: u64,
        message: String,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, offset: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: "<input>".to_string(),
            line,
            offset,
            message: message.into(),
        }
    }

    /// Attach a file path to a parse error produced from an anonymous reader.
    pub(crate) fn with_source_name(self, name: &str) -> Self {
        match self {
            Error::Parse {
                line,
                offset,
                message,
                ..
            } => Error::Parse {
                source_name: name.to_string(),
                line,
                offset,
                message,
            },
            other => other,
        }
    }
}
