use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("response matrix is empty after removing degenerate learners and items")]
    EmptyAfterReduction,

    #[error("non-finite parameter at iteration {iteration}: {detail}")]
    NumericalFailure { iteration: usize, detail: String },

    #[error("{source_name}:{line}: column `{column}`: {message}")]
    Parse {
        source_name: String,
        line: u64,
        column: String,
        message: String,
    },

    #[error(
        "{source_name}:{line}: duplicate event ({learner_id}, {item_id}, t={timestamp}) first seen on line {first_line}"
    )]
    DuplicateEvent {
        source_name: String,
        line: u64,
        first_line: u64,
        learner_id: String,
        item_id: String,
        timestamp: f64,
    },

    #[error("administrations for learner {learner_id} are not strictly increasing at index {index}")]
    AdministrationsOutOfOrder { learner_id: String, index: usize },

    #[error("segment {administration_index} of learner {learner_id} has no calibrated items")]
    UndefinedDifficulty {
        learner_id: String,
        administration_index: usize,
    },

    #[error("item bank exhausted: session needs {needed} items but the bank holds {available}")]
    BankExhausted { needed: usize, available: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
