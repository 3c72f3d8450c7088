use std::io;
use std::path::PathBuf;

use regen_core::NodeId;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Code(#[from] regen_core::Error),
    #[error("data loss: {live} live nodes, {k} needed to collect")]
    DataLoss { live: usize, k: usize },
    #[error("repair impossible: {live} live helpers, {d} needed")]
    RepairImpossible { live: usize, d: usize },
    #[error("node {0} has already failed")]
    AlreadyFailed(NodeId),
    #[error("node {0} is live, nothing to repair")]
    NotFailed(NodeId),
    #[error("input is empty")]
    EmptyInput,
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

pub type Result<T> = std::result::Result<T, SimError>;

impl SimError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
