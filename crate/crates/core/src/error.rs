use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("disconnected topology: node {unreachable} is unreachable from node {from}")]
    Disconnected { from: usize, unreachable: usize },

    #[error("degenerate topology: {0}")]
    Degenerate(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("could not generate connected topology: {0}")]
    Generation(String),

    #[error("no edges in scope")]
    NoEdgesInScope,

    #[error("mismatched node universes: {left} vs {right}")]
    UniverseMismatch { left: usize, right: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
