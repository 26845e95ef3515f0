use std::path::PathBuf;

/// Errors produced anywhere in the indexing, retrieval and evaluation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("i/o error")]
    Stream(#[from] std::io::Error),

    #[error("malformed document block at byte offset {offset}: {reason}")]
    MalformedDocument { offset: u64, reason: String },

    #[error("document block #{block} (byte offset {offset}) has no DOCNO")]
    MissingDocno { block: usize, offset: u64 },

    #[error("{source_name}:{line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },

    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),

    #[error("duplicate query id {0:?}")]
    DuplicateQuery(String),

    #[error("query {0:?} has no terms after normalization")]
    EmptyTopic(String),

    #[error("unknown document id {0:?}")]
    UnknownDocument(String),

    #[error("index format version mismatch: found {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("invalid index snapshot: {0}")]
    Snapshot(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty document set")]
    EmptyDocumentSet,

    #[error("query model kind mismatch: expected {expected}, got {found}")]
    ModelKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("query sets differ: {0}")]
    QueryMismatch(String),

    #[error("document {0:?} was already judged in this session")]
    AlreadyJudged(String),

    #[error("invalid JSON")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(source_name: impl Into<String>, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            reason: reason.into(),
        }
    }
}
