//! Error type shared across the crate.
//!
//! Every variant is classified into a [`Category`] so binaries can map
//! failures onto stable process exit codes (validation = 1, I/O = 2,
//! internal invariant = 3).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus is empty: {0}")]
    EmptyCorpus(String),

    #[error("attribution input, line {line}: {message}")]
    Ingest { line: u64, message: String },

    #[error("lexicon file, line {line}: {message}")]
    Lexicon { line: u64, message: String },

    #[error("topic matrix, line {line}: {message}")]
    TopicMatrix { line: u64, message: String },

    #[error("{n} tokens exceeds the exact enumeration bound of {bound}; use sampled_shapley instead")]
    EnumerationBound { n: usize, bound: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("word {0:?} appears in attributions but not in the corpus counts")]
    MissingCount(String),

    #[error("explanation is all zeros and cannot be normalized")]
    DegenerateExplanation,

    #[error("comparison refused: {0}")]
    ComparisonRefused(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Coarse failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Validation,
    Io,
    Internal,
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Io(_) => Category::Io,
            Error::Internal(_) => Category::Internal,
            _ => Category::Validation,
        }
    }

    /// Stable exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            Category::Validation => 1,
            Category::Io => 2,
            Category::Internal => 3,
        }
    }
}
