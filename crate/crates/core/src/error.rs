use alloc::string::String;
use alloc::vec::Vec;

use crate::formula::ParseError;

/// Errors produced while building inputs, evaluating formulas or optimizing.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("signal has no samples")]
    EmptySignal,
    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },
    #[error("timestep must be finite and positive, got {0}")]
    InvalidTimestep(f64),
    #[error("no signals supplied")]
    NoSignals,
    #[error("channel `{name}` has length {found}, expected {expected}")]
    LengthMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("channel `{name}` has timestep {found}, expected {expected}")]
    TimestepMismatch { name: String, expected: f64, found: f64 },
    #[error("invalid channel name `{0}`")]
    InvalidName(String),
    #[error("invalid interval [{a},{b}]: lower bound exceeds upper bound")]
    InvalidInterval { a: usize, b: usize },
    #[error("invalid smooth interval: {0}")]
    InvalidSmoothInterval(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("time index {index} out of range for signal of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("reduction window has no kept entries")]
    EmptyWindow,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    #[error("formula references missing signals: {0:?}")]
    MissingVariables(Vec<String>),
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("optimization diverged at step {step}")]
    Diverged { step: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
