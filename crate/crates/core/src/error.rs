use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    /// A score matrix, parameter set or dataset violates a structural invariant.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// `v_s^2 + a_c^2 == 0` for a present observation; the likelihood is unbounded there.
    #[error("degenerate variance at video {video}, subject {subject}")]
    DegenerateVariance { video: usize, subject: usize },

    /// A subject with present scores has zero spread, so it cannot be standardized.
    #[error("subject {subject} has zero score variance")]
    ZeroVariance { subject: usize },

    #[error("video {video} has no scores left after subject rejection")]
    EmptyAfterRejection { video: usize },

    #[error(
        "could not draw a subsample covering every video and subject after {attempts} attempts"
    )]
    CoverageUnattainable { attempts: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{path}: line {line}, field {field}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        field: String,
        reason: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateVariance { .. }
                | Error::ZeroVariance { .. }
                | Error::EmptyAfterRejection { .. }
                | Error::CoverageUnattainable { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
