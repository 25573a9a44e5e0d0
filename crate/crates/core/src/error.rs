use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row} has {found} fields, header has {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("empty cell at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("variable `{0}` has a single state; at least two are required")]
    SingleState(String),
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unknown variable id {0}")]
    UnknownVariable(usize),
    #[error("unknown variable name `{0}`")]
    UnknownName(String),
    #[error("variable {0} appears both as child and parent")]
    ChildInParents(usize),
    #[error("duplicate variable id {0}")]
    DuplicateVariable(usize),

    #[error("node {0} is out of range")]
    NodeOutOfRange(usize),
    #[error("self-arc on node {0}")]
    SelfArc(usize),
    #[error("nodes {0} and {1} are already linked")]
    DuplicateArc(usize, usize),
    #[error("arc {0} -> {1} would create a directed cycle")]
    Cycle(usize, usize),
    #[error("no arc {0} -> {1}")]
    MissingArc(usize, usize),
    #[error("node sets differ: {0}")]
    NodeSetMismatch(String),
    #[error("node sets passed to d-separation overlap")]
    OverlappingSets,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0} variables exceed the exact-search ceiling of {1}")]
    TooManyVariables(usize, usize),

    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("no eligible pair of children left for confounder {0}")]
    NoEligiblePair(usize),
    #[error("confounder {index}: no admissible CPTs after {attempts} draws")]
    InjectionExhausted { index: usize, attempts: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
