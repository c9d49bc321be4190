use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Cartan label `{0}`: {1}")]
    InvalidLabel(String, String),

    #[error("simple index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },

    #[error("Weyl group order {order} exceeds the enumeration cap {cap}")]
    GroupTooLarge { order: u128, cap: usize },

    #[error("lattice mismatch: expected {expected}, got {got}")]
    LatticeMismatch { expected: &'static str, got: &'static str },

    #[error("zero argument")]
    ZeroArgument,

    #[error("singular point: {0}")]
    Singular(String),

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("invalid q-context: {0}")]
    InvalidContext(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
