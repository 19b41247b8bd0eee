use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("integer overflow while adding objective vectors")]
    Overflow,

    #[error("set is not stable: {0}")]
    NotStable(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("vector {0} is not a member of the set")]
    NotMember(String),

    /// A configurable resource cap was hit (provenance size, B&B nodes, ...).
    #[error("resource cap exceeded: {what} (cap = {cap})")]
    ResourceCap { what: &'static str, cap: u64 },

    /// Generation could not reach its target within the iteration cap.
    #[error("target cardinality {target} unreachable after {iterations} samples (reached {reached})")]
    Unreachable {
        target: usize,
        reached: usize,
        iterations: u64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
