use alloc::string::String;

/// Errors surfaced by the core library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid flip {op} for length {k}")]
    InvalidFlip { op: String, k: usize },
    #[error("flip #{index} in sequence is invalid: {source}")]
    InvalidFlipAt {
        index: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    #[error("position {pos} out of range 1..={max}")]
    PositionOutOfRange { pos: usize, max: usize },
    #[error("value {value} out of range 1..={k}")]
    ValueOutOfRange { value: usize, k: usize },
    #[error("rank {rank} out of range for length {k}")]
    RankOutOfRange { rank: u64, k: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("length {0} is odd; the pairing requires even length")]
    OddLength(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("table for {graph} n={n} needs {bytes} bytes, over the {budget}-byte budget")]
    OverBudget {
        graph: &'static str,
        n: usize,
        bytes: u128,
        budget: u64,
    },
    #[error("parse error: {0}")]
    Parse(String),
    /// An algorithmic contract was violated. Always a bug.
    #[error("internal assertion failed: {0}")]
    Internal(String),
}

impl Error {
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
