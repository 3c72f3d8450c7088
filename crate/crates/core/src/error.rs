use alloc::string::String;

use crate::field::FieldSpec;
use crate::node::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("value {value} is not an element of a field of order {order}")]
    OutOfRange { value: u64, order: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("field of order {have} is too small, need at least {need}")]
    FieldTooSmall { need: usize, have: u32 },
    #[error("expected {expected} symbols, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("node {0} given more than once")]
    DuplicateNode(NodeId),
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("expected {expected} nodes, got {got}")]
    WrongNodeCount { expected: usize, got: usize },
    #[error("node {0} is not live")]
    DeadNode(NodeId),
    #[error("missing helper node {0}")]
    MissingHelper(NodeId),
    #[error("nodes {0} and {1} disagree on their shared symbol")]
    InconsistentSymbols(NodeId, NodeId),
    #[error("nullspace coefficient {0} is zero; main vectors are not MDS")]
    ZeroDelta(usize),
    #[error("chosen nodes span only {rank} of {needed} dimensions")]
    RankDeficient { rank: usize, needed: usize },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

pub type Result<T> = core::result::Result<T, Error>;
