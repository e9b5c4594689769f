use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no admissible rider for order {order}")]
    Infeasible { order: usize },

    #[error("instance has no hard-feasible assignment")]
    NoFeasibleAssignment,

    #[error("assignment violates {constraint}")]
    HardViolation { constraint: String },

    #[error("model needs {qubits} qubits, limit is {limit}")]
    QubitLimit { qubits: usize, limit: usize },

    #[error("mixer registers overlap at qubit {0}")]
    OverlappingRegisters(usize),

    #[error("unknown solver `{0}`")]
    UnknownSolver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dim(expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
