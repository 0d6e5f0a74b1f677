use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("noise sigma must be non-negative, got {0}")]
    NegativeNoise(f64),

    #[error(
        "hour {t}: reserve requirement {required:.3} MW exceeds available capacity {available:.3} MW"
    )]
    ReserveExceedsCapacity {
        t: usize,
        required: f64,
        available: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("action index {index} out of range for {len} candidates")]
    ActionOutOfRange { index: usize, len: usize },

    #[error("column {0} is not fractional in the node solution")]
    NotFractional(usize),

    #[error("policy file is truncated (needed {needed} bytes at offset {offset})")]
    TruncatedPolicy { offset: usize, needed: usize },

    #[error("policy file is malformed: {0}")]
    MalformedPolicy(String),

    #[error("incompatible policy version {found} (this build reads {expected})")]
    IncompatiblePolicyVersion { found: u32, expected: u32 },

    #[error("policy feature hash {found:016x} does not match this build's {expected:016x}")]
    FeatureHashMismatch { found: u64, expected: u64 },

    #[error("trajectory store holds no usable state-action pairs")]
    EmptyStore,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
