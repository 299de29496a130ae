//! Error type shared by all tomography operations.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("hilbert space must have 1 or 2 modes, got {0}")]
    ModesOutOfRange(u8),

    #[error("fock truncation must be at least 2, got {0}")]
    TruncationTooSmall(usize),

    #[error("coherent amplitude must be finite")]
    NonFiniteAmplitude,

    #[error(
        "truncation {truncation} too small for amplitude |alpha|^2 = {amp_sqr:.6}: \
         tail mass {tail:.3e} exceeds 1e-8"
    )]
    TruncationInadequate {
        amp_sqr: f64,
        truncation: usize,
        tail: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("mode count mismatch: expected {expected}, got {got}")]
    ModeMismatch { expected: u8, got: u8 },

    #[error("operation requires a two-mode state, got a single-mode one")]
    TwoModeRequired,

    #[error("unphysical state: eigenvalue {min_eigenvalue:.3e} below tolerance")]
    UnphysicalState { min_eigenvalue: f64 },

    #[error("matrix is not Hermitian: max asymmetry {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },

    #[error("trace {trace:.12} differs from 1 beyond tolerance")]
    TraceNotOne { trace: f64 },

    #[error("invalid state spec `{spec}`: {reason}")]
    InvalidStateSpec { spec: String, reason: String },

    #[error("parameter `{name}` = {value} out of range: {constraint}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("invalid solver config: {0}")]
    InvalidSolverConfig(&'static str),

    #[error("probe basis Gram matrix numerically singular even with regularization {regularization:.3e}")]
    SingularGram { regularization: f64 },

    #[error("data pattern length mismatch: expected {expected} settings, got {got}")]
    PatternMismatch { expected: usize, got: usize },

    #[error("expected a probability pattern, got a frequency pattern")]
    NotAProbabilityPattern,

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("csv parse error at line {line}: {reason}")]
    CsvParse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
