use std::path::PathBuf;

use crate::discovery::{DiscoveryStats, ObjectCluster};

/// Errors surfaced by the library. I/O variants carry the offending path.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("scene generation failed: {0}")]
    Generation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("memory file has bad magic bytes")]
    BadMagic,

    #[error("memory file version {0} is not supported")]
    UnsupportedVersion(u32),

    #[error("memory file corrupt: {0}")]
    Corrupt(String),

    #[error("memory is already finalized")]
    Finalized,

    #[error("memory must be finalized first")]
    NotFinalized,

    /// Discovery aborted because the comparison budget ran out. The clusters
    /// found so far are carried along so callers can inspect the partial run.
    #[error("comparison budget exhausted after {comparisons} comparisons")]
    BudgetExhausted {
        comparisons: u64,
        clusters: Vec<ObjectCluster>,
        stats: DiscoveryStats,
    },

    #[error("graph has {parts} parts, exhaustive search is capped at {limit}")]
    TooLarge { parts: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image {
            path: path.into(),
            source,
        }
    }
}
