//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed row: {reason}")]
    MalformedRow {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("duplicate lemma '{lemma}' at {path}:{line}")]
    DuplicateLemma {
        lemma: String,
        path: PathBuf,
        line: usize,
    },

    #[error("bad n-gram line {line}: {reason}: {content:?}")]
    BadNgramLine {
        line: usize,
        reason: String,
        content: String,
    },

    #[error("verb '{lemma}' has zero subjunctive tokens; cannot compute frequency")]
    ZeroTotalTokens { lemma: String },

    #[error("degenerate discrete parameters: c = 0 and gamma = 0 leave every state fixed")]
    DegenerateParams,

    #[error("time grid must be ascending and start at 0 (got {0:?} at index {1})")]
    BadTimeGrid(f64, usize),

    #[error("fit for '{lemma}' needs at least 3 points, got {n}")]
    TooFewPoints { lemma: String, n: usize },

    #[error("optimizer did not converge for '{lemma}': {diagnostics}")]
    NoConvergence { lemma: String, diagnostics: String },

    #[error("bootstrap: {0}")]
    Bootstrap(String),

    #[error("{0}")]
    InvalidInput(String),

    #[error("unknown simulator '{0}' (known: {1})")]
    UnknownSimulator(String, String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
