use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("vector {index} has norm {norm}, expected a unit vector")]
    Normalization { index: usize, norm: f64 },

    #[error("empty dictionary")]
    Empty,

    #[error("dictionary structure: {0}")]
    Structure(String),

    #[error("dictionary does not span C^{dim} (smallest singular value ratio {ratio:e})")]
    Rank { dim: usize, ratio: f64 },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unsupported file version {found} (expected {expected})")]
    Version { found: u64, expected: u64 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("point is not dual feasible: max overlap {overlap}")]
    Feasibility { overlap: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
