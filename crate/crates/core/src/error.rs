//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fine grid must have a power-of-two interval count, got {0}")]
    NotPowerOfTwo(usize),

    #[error("{levels} levels leave fewer than 2 intervals on the coarsest grid (n0 = {n0})")]
    TooManyLevels { n0: usize, levels: usize },

    #[error("domain is empty or reversed")]
    EmptyDomain,

    #[error("index {index} out of range at level {level}")]
    IndexOutOfRange { index: usize, level: usize },

    #[error("unsupported interpolation order {0}")]
    UnsupportedOrder(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("representations live on different hierarchies")]
    HierarchyMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerically unstable at step {step}, t = {time}")]
    Unstable { step: usize, time: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
