//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the toolkit's operations.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("fields live on different grids ({0} vs {1} points per axis)")]
    GridMismatch(usize, usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter configuration: {0}")]
    InvalidConfig(String),

    #[error("schedule-overflow: a^(b^q) exceeds the scalar range at level {level}; largest representable level is {max_level}")]
    ScheduleOverflow { level: u32, max_level: u32 },

    #[error("invalid-constant: {0}")]
    InvalidConstant(String),

    #[error("operand must have zero mean (|mean| = {mean:e} exceeds {tol:e})")]
    NonZeroMean { mean: f64, tol: f64 },

    #[error("norm exponent must satisfy p >= 1 (got {0})")]
    InvalidExponent(f64),

    #[error("direction-set construction failed: {0}")]
    Construction(String),

    #[error("matrix outside the admissible ball: |R - Id|_F = {0} > 1/2")]
    OutsideBall(f64),

    #[error("construction invariant violated: {0}")]
    InvariantViolation(String),

    #[error("quadrature failed to converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("r_perp too large: no disjoint shift placement found ({0})")]
    PlacementFailed(String),

    #[error("under-resolution: {0}")]
    UnderResolved(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("time-support violation: {0}")]
    SupportViolation(String),

    #[error("need at least {need} time samples (got {got})")]
    TooFewTimeSamples { need: usize, got: usize },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for CoreError {
    fn from(e: serde_json::Error) -> Self {
        CoreError::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
