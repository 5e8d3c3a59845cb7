use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("index out of range: {what} {index} (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },
    #[error("duplicate coefficient at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("lower bound exceeds upper bound for variable {0}")]
    InvalidBounds(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("simplex stalled after {0} pivots")]
    SolverStall(usize),
    #[error("problem has no finite optimum")]
    NotOptimal,
    #[error("quadratic program did not converge in {0} iterations")]
    QpNoConvergence(usize),
    #[error("instance too large for enumeration (m={m}, n={n}, limit {limit})")]
    TooLarge { m: usize, n: usize, limit: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("target does not match task {0}")]
    TargetMismatch(&'static str),
    #[error("empty dataset")]
    EmptyDataset,
}
