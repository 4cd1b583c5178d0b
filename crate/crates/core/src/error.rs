use std::path::PathBuf;

use crate::potts::ModelParams;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("sequence too short: {what} needs at least {needed} symbols, got {got}")]
    TooShort {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("state space too large to enumerate: q^N = {q}^{n}")]
    StateSpaceTooLarge { q: usize, n: usize },

    #[error("optimization diverged at iteration {iteration} (objective {objective})")]
    Diverged {
        iteration: usize,
        objective: f64,
        /// Last finite iterate.
        last_params: Box<ModelParams>,
    },

    #[error("unknown symbol {0} for this alphabet")]
    UnknownSymbol(i64),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {message}")]
    Format { context: String, message: String },

    #[error("replay mismatch: {0}")]
    ReplayMismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Format {
            context: context.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code for this error: 3 for data errors, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite(_) | Error::Diverged { .. } => 4,
            _ => 3,
        }
    }
}
