use std::fmt;

use crate::error::{EvalError, EvalErrorKind};
use crate::metric::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(&self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(&self, v: f64) -> Result<f64, EvalErrorKind> {
        Ok(match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => {
                if v <= 0.0 {
                    return Err(EvalErrorKind::Domain("log"));
                }
                v.ln()
            }
            Func::Sqrt => {
                if v < 0.0 {
                    return Err(EvalErrorKind::Domain("sqrt"));
                }
                v.sqrt()
            }
            Func::Abs => v.abs(),
        })
    }
}

/// Expression tree for one coordinate of a map.
///
/// Literals are non-negative; a leading minus is always a [`Expr::Neg`] node.
/// Variables are zero-based (`Var(0)` is `x1`, or `x` in one dimension).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalErrorKind> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Call(f, e) => f.apply(e.eval(x)?)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval(x)?;
                let b = b.eval(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalErrorKind::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => pow(a, b)?,
                }
            }
        };
        if v.is_nan() {
            return Err(EvalErrorKind::Domain("arithmetic"));
        }
        Ok(v)
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) | Expr::Call(_, e) => e.max_var(),
            Expr::Binary(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn write(&self, dim: usize, out: &mut String) {
        match self {
            Expr::Num(v) => out.push_str(&v.to_string()),
            Expr::Var(i) => {
                if dim == 1 {
                    out.push('x');
                } else {
                    out.push_str(&format!("x{}", i + 1));
                }
            }
            Expr::Neg(e) => {
                out.push_str("(-");
                e.write(dim, out);
                out.push(')');
            }
            Expr::Call(f, e) => {
                out.push_str(f.name());
                out.push('(');
                e.write(dim, out);
                out.push(')');
            }
            Expr::Binary(op, a, b) => {
                out.push('(');
                a.write(dim, out);
                out.push(op.symbol());
                b.write(dim, out);
                out.push(')');
            }
        }
    }
}

fn pow(base: f64, exp: f64) -> Result<f64, EvalErrorKind> {
    let v = if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
        if base == 0.0 && exp < 0.0 {
            return Err(EvalErrorKind::DivisionByZero);
        }
        base.powi(exp as i32)
    } else {
        if base < 0.0 {
            return Err(EvalErrorKind::Domain("^"));
        }
        base.powf(exp)
    };
    Ok(v)
}

/// A d-dimensional map given by one expression per output coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct MapExpr {
    dim: usize,
    components: Vec<Expr>,
}

impl MapExpr {
    /// Assembles a map from components. Panics if the component count or a
    /// variable index does not fit `dim`; use [`crate::map::parse`] for
    /// untrusted input.
    pub fn new(dim: usize, components: Vec<Expr>) -> Self {
        assert_eq!(components.len(), dim, "one component per dimension");
        assert!(
            components.iter().all(|c| c.max_var().is_none_or(|i| i < dim)),
            "variable index out of range"
        );
        MapExpr { dim, components }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn apply(&self, x: &Point) -> Result<Point, EvalError> {
        debug_assert_eq!(x.dim(), self.dim);
        let mut out = Vec::with_capacity(self.dim);
        for c in &self.components {
            let v = c
                .eval(x.coords())
                .map_err(|kind| EvalError { kind, point: x.clone() })?;
            if !v.is_finite() {
                return Err(EvalError {
                    kind: EvalErrorKind::Overflow,
                    point: x.clone(),
                });
            }
            out.push(v);
        }
        Ok(Point::from_vec(out))
    }

    /// Fully parenthesized canonical text; parses back to the same tree.
    pub fn print(&self) -> String {
        let mut out = String::new();
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            c.write(self.dim, &mut out);
        }
        out
    }
}

impl fmt::Display for MapExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pow_node() -> Expr {
        Expr::Binary(BinOp::Pow, Box::new(Expr::Var(0)), Box::new(Expr::Num(3.0)))
    }

    #[test]
    fn prints_power_node() {
        assert_eq!(MapExpr::new(1, vec![pow_node()]).print(), "(x^3)");
        assert_eq!(MapExpr::new(2, vec![pow_node(), Expr::Var(1)]).print(), "(x1^3), x2");
    }

    #[test]
    fn eval_errors_carry_kind() {
        let log = Expr::Call(Func::Log, Box::new(Expr::Var(0)));
        assert_eq!(log.eval(&[-1.0]), Err(EvalErrorKind::Domain("log")));
        let div = Expr::Binary(BinOp::Div, Box::new(Expr::Num(1.0)), Box::new(Expr::Var(0)));
        assert_eq!(div.eval(&[0.0]), Err(EvalErrorKind::DivisionByZero));
        let root = Expr::Binary(BinOp::Pow, Box::new(Expr::Var(0)), Box::new(Expr::Num(0.5)));
        assert_eq!(root.eval(&[-4.0]), Err(EvalErrorKind::Domain("^")));
        assert_eq!(root.eval(&[4.0]), Ok(2.0));
    }

    #[test]
    fn overflow_is_reported_with_point() {
        let m = MapExpr::new(1, vec![Expr::Call(Func::Exp, Box::new(Expr::Var(0)))]);
        let x = Point::scalar(1000.0).unwrap();
        let err = m.apply(&x).unwrap_err();
        assert!(err.is_overflow());
        assert_eq!(err.point, x);
    }

    #[test]
    fn integer_powers_use_exact_multiplication() {
        let m = MapExpr::new(1, vec![pow_node()]);
        assert_eq!(m.apply(&Point::scalar(10.0).unwrap()).unwrap()[0], 1000.0);
        assert_eq!(pow(-2.0, 3.0), Ok(-8.0));
    }
}
