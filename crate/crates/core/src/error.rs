use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("story splits into {found} sentences, expected 5")]
    SentenceCount { found: usize },

    #[error("no relation connective found in rule {rule:?}")]
    NoRelation { rule: String },

    #[error("rule {rule:?} contains two distinct connectives {first:?} and {second:?}")]
    AmbiguousRelation {
        rule: String,
        first: String,
        second: String,
    },

    #[error("empty statement in rule {rule:?}")]
    EmptyStatement { rule: String },

    #[error("selected sentence {selected:?} not found in story (best similarity {best:.3})")]
    SelectedSentenceNotFound { selected: String, best: f64 },

    #[error("dimension {value:?} outside 1..=10")]
    DimensionRange { value: String },

    #[error("missing column {column:?}")]
    MissingColumn { column: String },

    #[error("invalid entry: {0}")]
    InvalidEntry(String),

    #[error("invalid relation token {0:?}")]
    InvalidRelation(String),

    #[error("entry {entry_id}: {source}")]
    Entry {
        entry_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("label syntax error in {text:?}: {reason}")]
    LabelSyntax { text: String, reason: &'static str },

    #[error("sentence index {index} outside 0..=4")]
    IndexOutOfRange { index: usize },

    #[error("label links sentence {index} to itself")]
    SelfLoop { index: usize },

    #[error("relation {0:?} is not in the label vocabulary")]
    UnknownRelation(String),

    #[error("remaining statement is empty")]
    DegenerateStatement,

    #[error("best candidate similarity {best:.3} is below the minimum {min:.3}")]
    BelowMinSimilarity { best: f64, min: f64 },

    #[error("no embedding for {0:?}")]
    EmbeddingMiss(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("length mismatch: {left} hypotheses/predictions vs {right} references")]
    LengthMismatch { left: usize, right: usize },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("line {line}: vector has dimension {found}, expected {expected}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attaches an entry id, unless one is already attached.
    pub fn in_entry(self, entry_id: &str) -> Self {
        match self {
            e @ Error::Entry { .. } => e,
            e => Error::Entry {
                entry_id: entry_id.to_owned(),
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, looking through entry annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Entry { source, .. } => source.root(),
            e => e,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
