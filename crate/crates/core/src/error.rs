use thiserror::Error;

use crate::model::Phase;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("conductivities must satisfy alpha1 > alpha0 > 0 (got alpha1 = {alpha1}, alpha0 = {alpha0})")]
    InvalidMaterials { alpha1: f64, alpha0: f64 },

    #[error("volume fraction {0} is outside [0, 1]")]
    InvalidFraction(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension must be at least 2 (got {0})")]
    InvalidDimension(usize),

    #[error("non-finite input value")]
    NonFinite,

    #[error("direction is infeasible (margin {margin:e})")]
    InfeasibleDirection { margin: f64 },

    #[error("probability weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),

    #[error("measure has no atoms")]
    EmptyMeasure,

    #[error("witness violates the moment inequality of phase {phase} (slack {slack:e})")]
    InfeasibleWitness { phase: Phase, slack: f64 },

    #[error("boundary triplet is not attained: flux residual {0:e} cannot be absorbed with zero slack")]
    BoundaryUnattainable(f64),

    #[error("ray never re-enters the zero level set of psi")]
    NoPositiveRoot,

    #[error("point lies outside C(t, U): psi = {0:e}")]
    OutsideC(f64),

    #[error("boundary oracle does not support dimension {0}")]
    UnsupportedDimension(usize),

    #[error("laminate invariant violated at atom {index}: {reason}")]
    InvariantViolation { index: usize, reason: String },

    #[error("malformed laminate: {0}")]
    MalformedLaminate(String),

    #[error("invalid scan request: {0}")]
    InvalidScan(String),

    #[error("unknown tolerance key `{0}`")]
    UnknownTolerance(String),

    #[error("tolerance `{key}` must be positive (got {value})")]
    InvalidTolerance { key: String, value: f64 },

    #[error("solver did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
