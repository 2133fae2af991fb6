//! Recursive-descent parser for the map expression grammar.
//!
//! ```text
//! map     := expr (',' expr)*            one expression per coordinate
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?        right-associative, binds tightest
//! primary := number | variable | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables are `x1..xd`; in one dimension `x` is accepted as well. Functions
//! are `sin cos tan exp log sqrt abs`. There are no named constants.

use crate::error::InputError;
use crate::map::expr::{BinOp, Expr, Func, MapExpr};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(Tok, usize)>, InputError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let done = tok == Tok::End;
            out.push((tok, at));
            if done {
                return Ok(out);
            }
        }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn next(&mut self) -> Result<(Tok, usize), InputError> {
        while self.peek_byte().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(b) = self.peek_byte() else {
            return Ok((Tok::End, start));
        };
        let tok = match b {
            b'0'..=b'9' | b'.' => self.number()?,
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self.peek_byte().is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_') {
                    self.pos += 1;
                }
                Tok::Ident(self.src[start..self.pos].to_string())
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(b as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(InputError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        Ok((tok, start))
    }

    fn number(&mut self) -> Result<Tok, InputError> {
        let start = self.pos;
        let digits = |lx: &mut Self| {
            let s = lx.pos;
            while lx.peek_byte().is_some_and(|b| b.is_ascii_digit()) {
                lx.pos += 1;
            }
            lx.pos > s
        };
        let int = digits(self);
        let mut frac = false;
        if self.peek_byte() == Some(b'.') {
            self.pos += 1;
            frac = digits(self);
        }
        if !int && !frac {
            return Err(InputError::Syntax {
                offset: start,
                message: "malformed number".into(),
            });
        }
        if matches!(self.peek_byte(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek_byte(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if !digits(self) {
                // not an exponent; leave `e` for the identifier rule
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Tok::Num)
            .ok_or_else(|| InputError::Syntax {
                offset: start,
                message: format!("number `{text}` out of range"),
            })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn offset(&self) -> usize {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, InputError> {
        Err(InputError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, InputError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, InputError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, InputError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, InputError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, InputError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, at),
            Tok::End => Err(InputError::Syntax {
                offset: at,
                message: "unexpected end of input".into(),
            }),
            other => Err(InputError::Syntax {
                offset: at,
                message: format!("unexpected {}", describe(&other)),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), InputError> {
        if *self.peek() != Tok::RParen {
            return self.error("expected `)`");
        }
        self.bump();
        Ok(())
    }

    fn ident(&mut self, name: String, at: usize) -> Result<Expr, InputError> {
        if *self.peek() == Tok::LParen {
            let Some(func) = Func::from_name(&name) else {
                return Err(InputError::UnknownIdentifier {
                    name,
                    offset: at,
                    hint: " (not a known function)".into(),
                });
            };
            self.bump();
            let arg = self.expr()?;
            self.expect_rparen()?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if name == "x" && self.dim == 1 {
            return Ok(Expr::Var(0));
        }
        if let Some(index) = name
            .strip_prefix('x')
            .filter(|d| !d.is_empty() && !d.starts_with('0') && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse::<usize>().ok())
        {
            if index > self.dim {
                return Err(InputError::VariableOutOfRange {
                    index,
                    offset: at,
                    dim: self.dim,
                });
            }
            return Ok(Expr::Var(index - 1));
        }
        let hint = match name.as_str() {
            "e" => " (no named constants; write exp(...))".to_string(),
            "pi" => " (no named constants; write the numeric value)".to_string(),
            n if Func::from_name(n).is_some() => " (function needs parentheses)".to_string(),
            "x" => format!(" (use x1..x{} in {} dimensions)", self.dim, self.dim),
            _ => String::new(),
        };
        Err(InputError::UnknownIdentifier { name, offset: at, hint })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses a `dim`-dimensional map: `dim` comma-separated coordinate expressions.
pub fn parse(src: &str, dim: usize) -> Result<MapExpr, InputError> {
    if dim == 0 {
        return Err(InputError::Setting {
            name: "dimension".into(),
            message: "must be at least 1".into(),
        });
    }
    if src.trim().is_empty() {
        return Err(InputError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks: Lexer::tokenize(src)?,
        idx: 0,
        dim,
    };
    let mut components = vec![p.expr()?];
    loop {
        match p.peek() {
            Tok::Comma => {
                p.bump();
                components.push(p.expr()?);
            }
            Tok::End => break,
            other => {
                let msg = format!("unexpected {}", describe(other));
                return p.error(msg);
            }
        }
    }
    if components.len() != dim {
        return Err(InputError::ComponentCount {
            expected: dim,
            got: components.len(),
        });
    }
    Ok(MapExpr::new(dim, components))
}
