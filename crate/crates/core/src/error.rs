use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate id: {0}")]
    DuplicateId(String),

    #[error("comment {id}: rating {value} outside [1,5]")]
    InvalidRating { id: String, value: i64 },

    #[error("comment {id}: no annotator ratings for {field}")]
    NoAnnotators { id: String, field: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("only one class present in labels for {0}")]
    SingleClass(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("loss became non-finite at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error(
        "source mismatch: threshold is for {expected:?}, article {article_id} is from {found:?}"
    )]
    SourceMismatch {
        expected: String,
        found: String,
        article_id: String,
    },

    #[error("topic {topic} out of range for {topics} topics")]
    TopicOutOfRange { topic: usize, topics: usize },

    #[error("unsupported model format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
