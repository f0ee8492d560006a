use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed CoNLL-U line.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A sentence whose head links do not form a tree.
    #[error("sentence {sentence}: {message}")]
    Structure { sentence: String, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("mean pooling over an empty graph")]
    EmptyGraph,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training error: {0}")]
    Training(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch} ({})", describe_last(*.last_finite_epoch))]
    Divergence {
        epoch: usize,
        last_finite_epoch: Option<usize>,
    },

    #[error("vocabulary error: {0}")]
    Vocabulary(String),

    #[error("decode error: {0}")]
    Decode(String),

    /// Dataset record failed validation.
    #[error("record {record}: field `{field}`: {message}")]
    Schema {
        record: String,
        field: String,
        message: String,
    },

    #[error("record {record}: label hierarchy violated (hostile=false but `{label}` is true)")]
    Hierarchy { record: String, label: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Checkpoint, vocabulary or embedding file that cannot be read back.
    #[error("load error: {0}")]
    Load(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// True for failures caused by non-finite arithmetic rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_) | Error::Divergence { .. })
    }
}

fn describe_last(epoch: Option<usize>) -> String {
    match epoch {
        Some(e) => format!("last finite epoch {e}"),
        None => "no epoch finished".into(),
    }
}
