//! Common fixed points of commuting self-maps `f`, `g` on a box in ℝᵈ where
//! `g` contracts relative to `f`:
//!
//! ```text
//! d(g(x), g(y)) <= k * d(f(x), f(y)),   0 < k < 1
//! ```
//!
//! The crate checks the hypotheses numerically ([`hypothesis`]), runs the
//! two-stage Picard construction with explicit error bounds ([`solver`]) and
//! certifies the answer by recomputing residuals.

pub mod error;
pub mod hypothesis;
pub mod map;
pub mod metric;
pub mod solver;

pub use error::{EvalError, EvalErrorKind, InputError};
pub use map::{Map, MapDef, MapExpr, MapTable};
pub use metric::{BoxDomain, Metric, Point, Region, Space};
