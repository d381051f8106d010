use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed notebook {path}: {reason}")]
    MalformedNotebook { path: String, reason: String },

    #[error("unsupported notebook format version {version} in {path} (need >= 4)")]
    UnsupportedVersion { path: String, version: i64 },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("anchor cell {0} not found")]
    AnchorNotFound(usize),

    #[error("cell {0} has blank source")]
    EmptyCell(String),

    #[error("no usable descriptor tokens in corpus")]
    EmptyCorpus,

    #[error("query is empty")]
    EmptyQuery,

    #[error("index has not been built")]
    IndexNotBuilt,

    #[error("not found: {0}")]
    NotFound(String),

    #[error("corrupt index: {0}")]
    CorruptIndex(String),

    #[error("index format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("no notebooks found under {0}")]
    NoNotebooks(PathBuf),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json { context: context.into(), source }
    }

    /// Stable machine-readable code used in API error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedNotebook { .. } => "MalformedNotebook",
            Error::UnsupportedVersion { .. } => "UnsupportedVersion",
            Error::ContractViolation(_) => "ContractViolation",
            Error::AnchorNotFound(_) => "AnchorNotFound",
            Error::EmptyCell(_) => "EmptyCell",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::EmptyQuery => "EmptyQuery",
            Error::IndexNotBuilt => "IndexNotBuilt",
            Error::NotFound(_) => "NotFound",
            Error::CorruptIndex(_) => "CorruptIndex",
            Error::VersionMismatch { .. } => "VersionMismatch",
            Error::NoNotebooks(_) => "NoNotebooks",
            Error::InvalidRequest(_) => "InvalidRequest",
            Error::Io { .. } => "Io",
            Error::Json { .. } => "Json",
        }
    }
}
