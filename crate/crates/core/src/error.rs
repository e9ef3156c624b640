//! Error types for the crate, grouped by subsystem.

use crate::geom::Vec2;
use thiserror::Error;

/// Domain error while evaluating an expression or field.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero at ({}, {})", at.x, at.y)]
    DivisionByZero { at: Vec2 },
    #[error("square root of a negative number at ({}, {})", at.x, at.y)]
    SqrtOfNegative { at: Vec2 },
    #[error("non-finite value at ({}, {})", at.x, at.y)]
    NonFinite { at: Vec2 },
}

/// Parse failure with a byte offset into the source text.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at offset {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("exponent must be an integer")]
    NonIntegerExponent,
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("trailing input after expression")]
    TrailingInput,
    #[error("malformed number literal")]
    BadNumber,
}

/// Errors from surface geometry operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("point ({}, {}) is not within tolerance {tol} of the boundary", at.x, at.y)]
    NotOnBoundary { at: Vec2, tol: f64 },
    #[error("point ({}, {}) lies outside the retraction margin {margin}", at.x, at.y)]
    OutsideMargin { at: Vec2, margin: f64 },
    #[error("invalid surface parameters: {0}")]
    InvalidParameters(String),
    #[error("boundary curve is invalid: {0}")]
    InvalidCurve(String),
}

/// Errors raised while integrating a semiflow.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("initial point ({}, {}) is not on the surface", at.x, at.y)]
    StartOutside { at: Vec2 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("sample point ({}, {}) is too close to the zero set (|X| = {modulus:.3e})", at.x, at.y)]
    NearZeroSet { at: Vec2, modulus: f64 },
    #[error("integration stopped early ({reason}) near ({}, {})", at.x, at.y)]
    Interrupted { reason: &'static str, at: Vec2 },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Errors from winding-number and index computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("vector field vanishes on the contour (min modulus {min_modulus:.3e} at ({}, {}))", at.x, at.y)]
    VanishingOnContour { min_modulus: f64, at: Vec2 },
    #[error("contour refinement limit {limit} exceeded")]
    RefinementLimitExceeded { limit: u32 },
    #[error("winding sum is not close to an integer (fractional part {fraction:.3e} of a turn)")]
    NonIntegerWinding { fraction: f64 },
    #[error("winding changed from {coarse} to {fine} under refinement")]
    UnstableUnderRefinement { coarse: i64, fine: i64 },
    #[error("another zero found at ({}, {}) inside the probe disk", at.x, at.y)]
    AnotherZeroInside { at: Vec2 },
    #[error("index depends on the probe radius: {at_r} at r, {at_half_r} at r/2")]
    RadiusDependent { at_r: i64, at_half_r: i64 },
    #[error("no stable time step found above tau_min = {tau_min}")]
    TauExhausted { tau_min: f64 },
    #[error("region is not isolating: |X| = {modulus:.3e} on the contour at ({}, {})", at.x, at.y)]
    NotIsolating { at: Vec2, modulus: f64 },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Errors from zero-set scanning and block decomposition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlockError {
    #[error("resolution {0} is too coarse (minimum 16)")]
    ResolutionTooCoarse(usize),
    #[error("zero components too close to separate at this resolution; blocks would merge")]
    ComponentsMerge,
    #[error("could not find a zero-free isolating contour after {passes} dilation passes")]
    NoIsolatingContour { passes: u32 },
    #[error("isolating contour leaves the retraction margin; increase resolution or margin")]
    ContourOutsideMargin,
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Errors from return-map and cycle detection.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleError {
    #[error("field is not transverse to the segment (normalized wedge {residual:.3e} at s = {s})")]
    TransversalityFailure { s: f64, residual: f64 },
    #[error("no sample returned to the transversal within the time budget")]
    NoReturns,
    #[error(transparent)]
    Flow(#[from] FlowError),
}
