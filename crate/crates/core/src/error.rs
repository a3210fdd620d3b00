use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("schema line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("{path}:{line}: {message}")]
    MalformedRow {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid clustering: {0}")]
    InvalidClustering(String),

    #[error("no node matches keyword `{term}`")]
    NoAnswer { term: String },

    #[error("keyword set {index} is empty")]
    EmptyKeywordSet { index: usize },

    #[error("cannot combine an empty set of edge weights")]
    EmptyCombination,

    #[error("missing cluster metadata for cluster {0}")]
    MissingMetadata(u32),

    #[error("{path}: bad magic {found:?}, expected {expected:?}")]
    BadMagic {
        path: PathBuf,
        found: [u8; 4],
        expected: [u8; 4],
    },

    #[error("{path}: unsupported format version {found} (expected {expected})")]
    VersionMismatch {
        path: PathBuf,
        found: u16,
        expected: u16,
    },

    #[error("{path}: file truncated")]
    Truncated { path: PathBuf },

    #[error("{path}: checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum {
        path: PathBuf,
        stored: u32,
        computed: u32,
    },

    #[error("{path}: corrupt payload: {message}")]
    Corrupt { path: PathBuf, message: String },

    #[error("cluster {id} written out of order (previous write was {previous})")]
    OutOfOrderWrite { id: u32, previous: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
