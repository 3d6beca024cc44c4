use thiserror::Error;

/// Why a learning run did not produce a hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnFailure {
    /// The (possibly corrupted) linear system has no solution.
    Inconsistent,
}

impl std::fmt::Display for LearnFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LearnFailure::Inconsistent => f.write_str("inconsistent linear system"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("input outside the domain: {0}")]
    OutOfDomain(String),

    #[error("value is not in the image of the permutation: {0}")]
    NotInImage(String),

    #[error("bad parameter: {0}")]
    BadParam(String),

    #[error("learning failed: {0}")]
    Learn(LearnFailure),

    #[error("hypothesis source failed for basis entry {entry}: {reason}")]
    SourceFailure { entry: usize, reason: String },

    #[error("evaluator failed for basis entry {entry}: {reason}")]
    EvaluatorFailure { entry: usize, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported format version: {0}")]
    VersionMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("probe budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
