use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed CoNLL-U input.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Malformed bracketed tree.
    #[error("offset {offset}: {msg}")]
    Bracket { offset: usize, msg: String },

    /// Malformed embedding or dictionary file.
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("unknown token id {0}")]
    Lookup(usize),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid tree {sent_id}: {report}")]
    InvalidTree { sent_id: String, report: String },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("model load error: {0}")]
    Load(String),

    /// Artifacts built with different kernels or tasks.
    #[error("incompatible: {0}")]
    Incompatible(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A kernel evaluation failed for one instance pair.
    #[error("instances {a} and {b}: {source}")]
    Pair {
        a: String,
        b: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short category tag used by command-line error reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } | Error::Bracket { .. } | Error::Format { .. } => "parse",
            Error::Lookup(_) | Error::Argument(_) => "argument",
            Error::InvalidTree { .. } => "tree",
            Error::Numeric(_) => "numeric",
            Error::Config(_) => "config",
            Error::Training(_) => "training",
            Error::Load(_) => "model",
            Error::Incompatible(_) => "incompatible",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Pair { source, .. } => source.category(),
        }
    }
}
