use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{EvalError, InputError};
use crate::map::expr::MapExpr;
use crate::map::parse::parse;
use crate::metric::Point;

/// Definition of a named map inside a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum MapDef {
    Expr(MapExpr),
    /// `outer ∘ inner`
    Compose {
        outer: String,
        inner: String,
    },
    /// `of` applied `n` times.
    Iterate {
        of: String,
        n: u32,
    },
    Identity,
}

impl MapDef {
    fn references(&self) -> Vec<&str> {
        match self {
            MapDef::Compose { outer, inner } => vec![outer, inner],
            MapDef::Iterate { of, .. } => vec![of],
            MapDef::Expr(_) | MapDef::Identity => vec![],
        }
    }
}

/// A resolved, self-contained map. Cheap to clone; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub enum Map {
    Expr(Arc<MapExpr>),
    Compose(Box<Map>, Box<Map>),
    Iterate(Box<Map>, u32),
    Identity(usize),
}

impl Map {
    pub fn parse(src: &str, dim: usize) -> Result<Map, InputError> {
        Ok(Map::Expr(Arc::new(parse(src, dim)?)))
    }

    pub fn identity(dim: usize) -> Map {
        Map::Identity(dim)
    }

    /// `outer ∘ inner`
    pub fn compose(outer: Map, inner: Map) -> Map {
        Map::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn iterate(of: Map, n: u32) -> Map {
        assert!(n >= 1, "iteration count must be at least 1");
        Map::Iterate(Box::new(of), n)
    }

    pub fn dim(&self) -> usize {
        match self {
            Map::Expr(e) => e.dim(),
            Map::Compose(outer, _) => outer.dim(),
            Map::Iterate(m, _) => m.dim(),
            Map::Identity(d) => *d,
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Map::Identity(_) => true,
            Map::Iterate(m, _) => m.is_identity(),
            Map::Compose(a, b) => a.is_identity() && b.is_identity(),
            Map::Expr(_) => false,
        }
    }

    /// Evaluates the map at `x`. `x` must have the map's dimension.
    pub fn apply(&self, x: &Point) -> Result<Point, EvalError> {
        match self {
            Map::Expr(e) => e.apply(x),
            Map::Compose(outer, inner) => outer.apply(&inner.apply(x)?),
            Map::Iterate(m, n) => {
                let mut y = m.apply(x)?;
                for _ in 1..*n {
                    y = m.apply(&y)?;
                }
                Ok(y)
            }
            Map::Identity(_) => Ok(x.clone()),
        }
    }
}

impl fmt::Display for Map {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Map::Expr(e) => write!(f, "[{e}]"),
            Map::Compose(a, b) => write!(f, "{a} ∘ {b}"),
            Map::Iterate(m, n) => write!(f, "({m})^{n}"),
            Map::Identity(_) => write!(f, "identity"),
        }
    }
}

/// Named map definitions sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MapTable {
    dim: usize,
    defs: BTreeMap<String, MapDef>,
}

impl MapTable {
    pub fn new(dim: usize) -> Self {
        MapTable {
            dim,
            defs: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn insert(&mut self, name: impl Into<String>, def: MapDef) -> Result<(), InputError> {
        let name = name.into();
        match &def {
            MapDef::Expr(e) if e.dim() != self.dim => {
                return Err(InputError::DimensionMismatch {
                    expected: self.dim,
                    got: e.dim(),
                })
            }
            MapDef::Iterate { n: 0, .. } => return Err(InputError::ZeroIterate(name)),
            _ => {}
        }
        self.defs.insert(name, def);
        Ok(())
    }

    /// Parses `src` and stores it under `name`.
    pub fn insert_expr(&mut self, name: impl Into<String>, src: &str) -> Result<(), InputError> {
        let e = parse(src, self.dim)?;
        self.insert(name, MapDef::Expr(e))
    }

    pub fn get(&self, name: &str) -> Option<&MapDef> {
        self.defs.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.keys().map(String::as_str)
    }

    /// Checks that every reference resolves and that there are no cycles.
    pub fn validate(&self) -> Result<(), InputError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Fresh,
            Active,
            Done,
        }
        fn visit<'a>(
            table: &'a MapTable,
            name: &'a str,
            marks: &mut BTreeMap<&'a str, Mark>,
            path: &mut Vec<&'a str>,
        ) -> Result<(), InputError> {
            let def = table
                .defs
                .get(name)
                .ok_or_else(|| InputError::UnknownMap(name.to_string()))?;
            match marks.get(name).copied().unwrap_or(Mark::Fresh) {
                Mark::Done => return Ok(()),
                Mark::Active => {
                    let start = path.iter().position(|n| *n == name).unwrap_or(0);
                    let mut cycle: Vec<&str> = path[start..].to_vec();
                    cycle.push(name);
                    return Err(InputError::Cycle(cycle.join(" -> ")));
                }
                Mark::Fresh => {}
            }
            marks.insert(name, Mark::Active);
            path.push(name);
            for r in def.references() {
                visit(table, r, marks, path)?;
            }
            path.pop();
            marks.insert(name, Mark::Done);
            Ok(())
        }

        let mut marks = BTreeMap::new();
        for name in self.defs.keys() {
            visit(self, name, &mut marks, &mut Vec::new())?;
        }
        Ok(())
    }

    /// Resolves `name` into a standalone [`Map`]. Fails on unknown names and cycles.
    pub fn resolve(&self, name: &str) -> Result<Map, InputError> {
        self.resolve_inner(name, &mut Vec::new())
    }

    fn resolve_inner<'a>(&'a self, name: &'a str, stack: &mut Vec<&'a str>) -> Result<Map, InputError> {
        if stack.contains(&name) {
            let mut cycle = stack.clone();
            cycle.push(name);
            return Err(InputError::Cycle(cycle.join(" -> ")));
        }
        let def = self
            .defs
            .get(name)
            .ok_or_else(|| InputError::UnknownMap(name.to_string()))?;
        stack.push(name);
        let m = match def {
            MapDef::Expr(e) => Map::Expr(Arc::new(e.clone())),
            MapDef::Identity => Map::Identity(self.dim),
            MapDef::Compose { outer, inner } => {
                Map::compose(self.resolve_inner(outer, stack)?, self.resolve_inner(inner, stack)?)
            }
            MapDef::Iterate { of, n } => Map::iterate(self.resolve_inner(of, stack)?, *n),
        };
        stack.pop();
        Ok(m)
    }

    /// Evaluates the named map at `x`.
    pub fn eval(&self, name: &str, x: &Point) -> Result<Point, EvalOrInput> {
        if x.dim() != self.dim {
            return Err(EvalOrInput::Input(InputError::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            }));
        }
        let m = self.resolve(name).map_err(EvalOrInput::Input)?;
        m.apply(x).map_err(EvalOrInput::Eval)
    }

    /// Names of the expression maps that `name` is built from (itself if it
    /// is an expression), in first-use order without repeats. Identity leaves
    /// are skipped.
    pub fn base_maps(&self, name: &str) -> Result<Vec<String>, InputError> {
        fn walk(t: &MapTable, name: &str, out: &mut Vec<String>, depth: usize) -> Result<(), InputError> {
            if depth > t.defs.len() {
                return Err(InputError::Cycle(name.to_string()));
            }
            match t
                .defs
                .get(name)
                .ok_or_else(|| InputError::UnknownMap(name.to_string()))?
            {
                MapDef::Expr(_) => {
                    if !out.iter().any(|n| n == name) {
                        out.push(name.to_string());
                    }
                }
                MapDef::Identity => {}
                def => {
                    for r in def.references() {
                        walk(t, r, out, depth + 1)?;
                    }
                }
            }
            Ok(())
        }
        let mut out = Vec::new();
        walk(self, name, &mut out, 0)?;
        Ok(out)
    }

    /// True when `name` is defined through `compose` or `iterate`.
    pub fn is_combinator(&self, name: &str) -> bool {
        matches!(
            self.defs.get(name),
            Some(MapDef::Compose { .. } | MapDef::Iterate { .. })
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalOrInput {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
