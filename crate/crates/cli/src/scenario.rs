//! TOML scenario files.
//!
//! ```toml
//! name = "example1"
//! x0 = 1.0
//!
//! [domain]
//! lower = 1.0
//! upper = 10.0
//! space_upper = inf
//!
//! [maps]
//! f = "x^2"
//! g = "x^3"
//!
//! [problem]
//! kind = "pair"
//! contractor = "f"
//! dominator = "g"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use commonfix::hypothesis::CheckConfig;
use commonfix::solver::{BoundMode, ScanConfig, SolveConfig};
use commonfix::{BoxDomain, InputError, MapDef, MapTable, Metric, Point, Region, Space};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", .path.display())]
    Parse { path: PathBuf, message: String },

    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error(transparent)]
    Input(#[from] InputError),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

/// A scalar or a per-axis list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Coords {
    One(f64),
    Many(Vec<f64>),
}

impl Coords {
    fn into_vec(self) -> Vec<f64> {
        match self {
            Coords::One(v) => vec![v],
            Coords::Many(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    dimension: Option<usize>,
    #[serde(default)]
    metric: Metric,
    x0: Coords,
    domain: RawDomain,
    maps: BTreeMap<String, toml::Value>,
    problem: RawProblem,
    #[serde(default)]
    numerics: Numerics,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    lower: Coords,
    upper: Coords,
    space_lower: Option<Coords>,
    space_upper: Option<Coords>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawProblem {
    Pair {
        contractor: String,
        dominator: String,
        k_declared: Option<f64>,
        #[serde(default)]
        certify_also: Vec<String>,
    },
    Chain {
        f: String,
        g: String,
        h: String,
    },
    Expansive {
        map: String,
        #[serde(default = "one")]
        n: u32,
    },
}

fn one() -> u32 {
    1
}

/// What the scenario asks for, by map name.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    /// `contractor - k - dominator`
    Pair {
        contractor: String,
        dominator: String,
        k_declared: Option<f64>,
        certify_also: Vec<String>,
    },
    /// `h - k - g` and `g - k' - f`
    Chain { f: String, g: String, h: String },
    /// `d(fⁿ(x), fⁿ(y)) >= k d(x, y)` with `k > 1`
    Expansive { map: String, n: u32 },
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Pair { .. } => "pair",
            Problem::Chain { .. } => "chain",
            Problem::Expansive { .. } => "expansive",
        }
    }

    /// Every map the problem names, in a fixed order.
    pub fn map_names(&self) -> Vec<&str> {
        match self {
            Problem::Pair {
                contractor,
                dominator,
                certify_also,
                ..
            } => {
                let mut v = vec![dominator.as_str(), contractor.as_str()];
                v.extend(certify_also.iter().map(String::as_str));
                v
            }
            Problem::Chain { f, g, h } => vec![f, g, h],
            Problem::Expansive { map, .. } => vec![map],
        }
    }

    /// The map whose orbit must stay bounded.
    pub fn orbit_map(&self) -> &str {
        match self {
            Problem::Pair { dominator, .. } => dominator,
            Problem::Chain { f, .. } => f,
            Problem::Expansive { map, .. } => map,
        }
    }
}

/// Optional numeric settings; unset fields take the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    pub tol: Option<f64>,
    pub tol_cert: Option<f64>,
    pub max_iter: Option<usize>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub slack: Option<f64>,
    pub radius_cap: Option<f64>,
    pub max_steps: Option<usize>,
    pub bound_mode: Option<BoundMode>,
    pub k_margin: Option<f64>,
    pub grid_n: Option<usize>,
}

impl Numerics {
    fn validate(&self) -> Result<(), ScenarioError> {
        let positive = [
            ("tol", self.tol),
            ("tol_cert", self.tol_cert),
            ("radius_cap", self.radius_cap),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(invalid(format!("numerics.{name}"), "must be positive and finite"));
                }
            }
        }
        if let Some(s) = self.slack {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(invalid("numerics.slack", "must be non-negative and finite"));
            }
        }
        if let Some(m) = self.k_margin {
            if !(0.0..1.0).contains(&m) {
                return Err(invalid("numerics.k_margin", "must lie in [0, 1)"));
            }
        }
        for (name, v) in [
            ("max_iter", self.max_iter),
            ("n_samples", self.n_samples),
            ("max_steps", self.max_steps),
        ] {
            if v == Some(0) {
                return Err(invalid(format!("numerics.{name}"), "must be at least 1"));
            }
        }
        if self.grid_n.is_some_and(|n| n < 2) {
            return Err(invalid("numerics.grid_n", "must be at least 2"));
        }
        Ok(())
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub space: Space,
    pub x0: Point,
    pub table: MapTable,
    pub problem: Problem,
    pub numerics: Numerics,
}

impl Scenario {
    pub fn check_config(&self) -> CheckConfig {
        let n = &self.numerics;
        let d = CheckConfig::default();
        CheckConfig {
            n_samples: n.n_samples.unwrap_or(d.n_samples),
            seed: n.seed.unwrap_or(d.seed),
            k_margin: n.k_margin.unwrap_or(d.k_margin),
            slack: n.slack,
            max_steps: n.max_steps.unwrap_or(d.max_steps),
            radius_cap: n.radius_cap,
            ..d
        }
    }

    pub fn solve_config(&self) -> SolveConfig {
        let n = &self.numerics;
        let d = SolveConfig::new(self.x0.clone());
        SolveConfig {
            tol: n.tol.unwrap_or(d.tol),
            tol_cert: n.tol_cert.unwrap_or(d.tol_cert),
            max_iter: n.max_iter.unwrap_or(d.max_iter),
            bound_mode: n.bound_mode.unwrap_or(d.bound_mode),
            slack: n.slack,
            ..d
        }
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            grid_n: self.numerics.grid_n,
            tol_cert: self.numerics.tol_cert.unwrap_or(ScanConfig::default().tol_cert),
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text).map_err(|e| match e {
        ScenarioError::Parse { message, .. } => ScenarioError::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Parse {
        path: PathBuf::from("<scenario>"),
        message: e.to_string().trim_end().to_string(),
    })?;

    let lower = raw.domain.lower.into_vec();
    let upper = raw.domain.upper.into_vec();
    let dim = raw.dimension.unwrap_or(lower.len());
    if dim == 0 {
        return Err(invalid("dimension", "must be at least 1"));
    }
    let widen = |c: Vec<f64>, field: &str| -> Result<Vec<f64>, ScenarioError> {
        match c.len() {
            1 if dim > 1 => Ok(vec![c[0]; dim]),
            n if n == dim => Ok(c),
            n => Err(invalid(field, format!("expected {dim} values, found {n}"))),
        }
    };
    let lower = widen(lower, "domain.lower")?;
    let upper = widen(upper, "domain.upper")?;
    let domain = BoxDomain::new(
        Point::new(lower.clone()).map_err(|e| invalid("domain.lower", e.to_string()))?,
        Point::new(upper.clone()).map_err(|e| invalid("domain.upper", e.to_string()))?,
    )
    .map_err(|e| invalid("domain", e.to_string()))?;

    let space_lower = match raw.domain.space_lower {
        Some(c) => widen(c.into_vec(), "domain.space_lower")?,
        None => lower,
    };
    let space_upper = match raw.domain.space_upper {
        Some(c) => widen(c.into_vec(), "domain.space_upper")?,
        None => upper,
    };
    let region = Region::new(space_lower, space_upper).map_err(|e| invalid("domain.space_lower", e.to_string()))?;
    let space = Space::with_region(domain, region, raw.metric).map_err(|e| invalid("domain", e.to_string()))?;

    let x0 = Point::new(raw.x0.into_vec()).map_err(|e| invalid("x0", e.to_string()))?;
    if x0.dim() != dim {
        return Err(invalid("x0", format!("expected {dim} coordinates, found {}", x0.dim())));
    }
    if !space.domain.contains(&x0, 0.0)? {
        return Err(invalid("x0", format!("{x0} lies outside the domain")));
    }

    let mut table = MapTable::new(dim);
    for (name, value) in &raw.maps {
        let def = map_def(name, value, dim)?;
        table
            .insert(name.clone(), def)
            .map_err(|e| invalid(format!("maps.{name}"), e.to_string()))?;
    }
    table.validate()?;

    let problem = match raw.problem {
        RawProblem::Pair {
            contractor,
            dominator,
            k_declared,
            certify_also,
        } => {
            if let Some(k) = k_declared {
                if !(k > 0.0 && k < 1.0) {
                    return Err(invalid("problem.k_declared", "must lie in (0, 1)"));
                }
            }
            Problem::Pair {
                contractor,
                dominator,
                k_declared,
                certify_also,
            }
        }
        RawProblem::Chain { f, g, h } => Problem::Chain { f, g, h },
        RawProblem::Expansive { map, n } => {
            if n == 0 {
                return Err(invalid("problem.n", "must be at least 1"));
            }
            Problem::Expansive { map, n }
        }
    };
    for name in problem.map_names() {
        if table.get(name).is_none() {
            return Err(invalid("problem", format!("unknown map `{name}`")));
        }
    }

    raw.numerics.validate()?;
    let scenario = Scenario {
        name: raw.name,
        space,
        x0,
        table,
        problem,
        numerics: raw.numerics,
    };
    scenario.solve_config().validate()?;
    Ok(scenario)
}

fn map_def(name: &str, value: &toml::Value, dim: usize) -> Result<MapDef, ScenarioError> {
    let field = format!("maps.{name}");
    let shape = || {
        invalid(
            &field,
            "expected an expression string, \"identity\", { compose = [outer, inner] } or { iterate = { of, n } }",
        )
    };
    match value {
        toml::Value::String(s) if s.trim() == "identity" => Ok(MapDef::Identity),
        toml::Value::String(s) => Ok(MapDef::Expr(
            commonfix::map::parse(s, dim).map_err(|e| invalid(&field, e.to_string()))?,
        )),
        toml::Value::Table(t) if t.len() == 1 => {
            if let Some(c) = t.get("compose") {
                let parts: Vec<&str> = c
                    .as_array()
                    .map(|a| a.iter().filter_map(toml::Value::as_str).collect())
                    .unwrap_or_default();
                match parts.as_slice() {
                    [outer, inner] if c.as_array().is_some_and(|a| a.len() == 2) => Ok(MapDef::Compose {
                        outer: outer.to_string(),
                        inner: inner.to_string(),
                    }),
                    _ => Err(invalid(
                        format!("{field}.compose"),
                        "expected two map names [outer, inner]",
                    )),
                }
            } else if let Some(it) = t.get("iterate") {
                let it = it.as_table().ok_or_else(shape)?;
                if it.keys().any(|k| k != "of" && k != "n") {
                    return Err(invalid(format!("{field}.iterate"), "only `of` and `n` are allowed"));
                }
                let of = it
                    .get("of")
                    .and_then(toml::Value::as_str)
                    .ok_or_else(|| invalid(format!("{field}.iterate.of"), "expected a map name"))?;
                let n = it
                    .get("n")
                    .and_then(toml::Value::as_integer)
                    .filter(|n| (1..=u32::MAX as i64).contains(n))
                    .ok_or_else(|| invalid(format!("{field}.iterate.n"), "expected a positive integer"))?;
                Ok(MapDef::Iterate {
                    of: of.to_string(),
                    n: n as u32,
                })
            } else {
                Err(shape())
            }
        }
        _ => Err(shape()),
    }
}
