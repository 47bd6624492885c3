//! Error type shared by every stage of the workbench.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no isolated-vertex-free G({n}, {p}) graph after {attempts} draws")]
    RetryBudgetExhausted { n: usize, p: f64, attempts: u32 },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("variable space mismatch: expected {expected}, found {found}")]
    VariableSpace {
        expected: &'static str,
        found: &'static str,
    },

    #[error("value {value} of variable {index} is outside the {space} domain")]
    OutOfDomain {
        index: usize,
        value: i8,
        space: &'static str,
    },

    #[error("{what} too large: {got} > {limit}")]
    TooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("embedding capacity exceeded: {requested} chains requested, {capacity} available")]
    Capacity { requested: usize, capacity: usize },

    #[error("no physical coupler between chains of logical pair ({0}, {1})")]
    MissingCoupler(usize, usize),

    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("chain {0} has no qubits")]
    EmptyChain(usize),

    #[error("exact clique solver exceeded its {0:?} deadline")]
    Timeout(std::time::Duration),

    #[error("schema error in {path}: {msg}")]
    Schema { path: String, msg: String },

    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },

    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("missing feature `{0}`")]
    MissingFeature(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 2,
            Error::Timeout(_) => 4,
            Error::Integrity(_) | Error::NoConvergence(_) => 5,
            _ => 3,
        }
    }
}
