use thiserror::Error;

use crate::metric::Point;

/// Input-level errors: malformed points, boxes, expressions and map tables.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point must have at least one coordinate")]
    EmptyPoint,

    #[error("coordinate {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("box lower bound exceeds upper bound on axis {axis} ({lower} > {upper})")]
    InvertedBox { axis: usize, lower: f64, upper: f64 },

    #[error("bound on axis {axis} is NaN")]
    NanBound { axis: usize },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}{hint}")]
    UnknownIdentifier { name: String, offset: usize, hint: String },

    #[error("variable x{index} at byte {offset} exceeds dimension {dim}")]
    VariableOutOfRange { index: usize, offset: usize, dim: usize },

    #[error("expected {expected} comma-separated components, found {got}")]
    ComponentCount { expected: usize, got: usize },

    #[error("unknown map `{0}`")]
    UnknownMap(String),

    #[error("map definitions form a cycle: {0}")]
    Cycle(String),

    #[error("iteration count for `{0}` must be at least 1")]
    ZeroIterate(String),

    #[error("invalid setting `{name}`: {message}")]
    Setting { name: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    /// A function was applied outside its domain (log of a non-positive value, etc.).
    Domain(&'static str),
    DivisionByZero,
    /// The result left the finite range of `f64`.
    Overflow,
}

/// Evaluation failure, carrying the input point at which it happened.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("evaluation failed at {point}: {}", describe(.kind))]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub point: Point,
}

fn describe(kind: &EvalErrorKind) -> String {
    match kind {
        EvalErrorKind::Domain(func) => format!("argument outside the domain of {func}"),
        EvalErrorKind::DivisionByZero => "division by zero".to_string(),
        EvalErrorKind::Overflow => "non-finite result".to_string(),
    }
}

impl EvalError {
    pub fn is_overflow(&self) -> bool {
        self.kind == EvalErrorKind::Overflow
    }
}
