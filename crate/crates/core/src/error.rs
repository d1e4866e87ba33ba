use alloc::string::String;

/// Errors produced by the representation library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid group order: {0}")]
    InvalidOrder(usize),
    #[error("group order {order} exceeds the configured maximum {max}")]
    Capacity { order: usize, max: usize },
    #[error("group tables violate the axioms: {0}")]
    GroupAxioms(String),
    #[error("action is not a valid permutation representation: {0}")]
    InvalidAction(String),
    #[error("element index {index} out of range for group of order {order}")]
    ElementOutOfRange { index: usize, order: usize },
    #[error("template index {index} out of range for bank of size {count}")]
    TemplateOutOfRange { index: usize, count: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("signal contains a non-finite value at coordinate {0}")]
    NonFinite(usize),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("template is not unit norm (norm = {0})")]
    NotUnitNorm(f64),
    #[error("bin grids differ")]
    GridMismatch,
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = core::result::Result<T, Error>;
