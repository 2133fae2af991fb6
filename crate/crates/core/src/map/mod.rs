//! Map expressions, their parser and printer, and the named-map table with
//! `compose` / `iterate` combinators.

mod expr;
mod parse;
mod table;

pub use expr::{BinOp, Expr, Func, MapExpr};
pub use parse::parse;
pub use table::{EvalOrInput, Map, MapDef, MapTable};
