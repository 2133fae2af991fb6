//! The `check`, `solve`, `certify` and `scan` commands. Each returns a
//! complete [`Report`]; the exit code is `report.exit_code`.

use std::path::Path;

use commonfix::hypothesis::{orbit_bounded, HypothesisReport, NamedMap, OrbitCheck, Verdict};
use commonfix::solver::{
    find_fixed_candidates, reduction_problem, solve_chain, solve_common_fixed_point, Attempt, BoundMode, ChainProblem,
    PairProblem, SolveError,
};
use commonfix::{InputError, Point};

use crate::report::{
    CertifySection, Report, Residual, ScanSection, ScannedCandidate, SolveFailure, SolveSection, Status,
};
use crate::scenario::{load_scenario, Problem, Scenario, ScenarioError};

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Check,
    Solve,
    Certify { point: String },
    Scan,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Solve => "solve",
            Command::Certify { .. } => "certify",
            Command::Scan => "scan",
        }
    }
}

/// Command-line overrides applied on top of the scenario's settings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Options {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub bound_mode: Option<BoundMode>,
    pub force: bool,
    pub timestamp: bool,
}

pub fn run(cmd: &Command, path: &Path, opts: &Options) -> Report {
    let mut report = match load_scenario(path).and_then(|s| apply(s, opts)) {
        Ok(scenario) => {
            let mut r = match cmd {
                Command::Check => cmd_check(&scenario),
                Command::Solve => cmd_solve(&scenario, opts.force),
                Command::Certify { point } => cmd_certify(&scenario, point),
                Command::Scan => cmd_scan(&scenario),
            };
            r.seed = Some(scenario.check_config().seed);
            r
        }
        Err(e) => input_error(cmd.name(), None, &e),
    };
    if opts.timestamp {
        report.generated_at = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    }
    report
}

fn apply(mut s: Scenario, opts: &Options) -> Result<Scenario, ScenarioError> {
    if opts.seed.is_some() {
        s.numerics.seed = opts.seed;
    }
    if opts.tol.is_some() {
        s.numerics.tol = opts.tol;
    }
    if opts.bound_mode.is_some() {
        s.numerics.bound_mode = opts.bound_mode;
    }
    s.solve_config().validate()?;
    Ok(s)
}

fn input_error(command: &str, name: Option<String>, e: &dyn std::fmt::Display) -> Report {
    let mut r = Report::new(command, name, Status::InputError);
    r.error = Some(e.to_string());
    r
}

fn named(s: &Scenario, name: &str) -> Result<NamedMap, InputError> {
    Ok(NamedMap::new(name, s.table.resolve(name)?))
}

fn pair_problem(s: &Scenario) -> Result<Option<PairProblem>, InputError> {
    let Problem::Pair {
        contractor,
        dominator,
        k_declared,
        certify_also,
    } = &s.problem
    else {
        return Ok(None);
    };
    let mut p = reduction_problem(&s.table, contractor, dominator, *k_declared)?;
    p.certify_also = certify_also.iter().map(|n| named(s, n)).collect::<Result<_, _>>()?;
    Ok(Some(p))
}

fn chain_problem(s: &Scenario) -> Result<Option<ChainProblem>, InputError> {
    let Problem::Chain { f, g, h } = &s.problem else {
        return Ok(None);
    };
    Ok(Some(ChainProblem {
        f: named(s, f)?,
        g: named(s, g)?,
        h: named(s, h)?,
    }))
}

fn hypotheses(s: &Scenario) -> Result<HypothesisReport, InputError> {
    let cfg = s.check_config();
    if let Some(p) = pair_problem(s)? {
        return Ok(HypothesisReport::for_pair(
            &p.contractor,
            &p.dominator,
            p.k_declared,
            &p.certify_also,
            &s.x0,
            &s.space,
            &cfg,
        ));
    }
    if let Some(c) = chain_problem(s)? {
        return Ok(HypothesisReport::for_chain(&c.f, &c.g, &c.h, &s.x0, &s.space, &cfg));
    }
    match &s.problem {
        Problem::Expansive { map, n } => Ok(HypothesisReport::for_expansive(&named(s, map)?, *n, &s.space, &cfg)),
        _ => unreachable!("pair and chain handled above"),
    }
}

/// Runs every hypothesis check: exit 0 when all pass, 1 on a failure, 4 when
/// only inconclusive verdicts remain.
pub fn cmd_check(s: &Scenario) -> Report {
    match hypotheses(s) {
        Ok(h) => {
            let mut r = Report::new("check", Some(s.name.clone()), Status::from_verdict(h.verdict()));
            r.hypotheses = Some(h);
            r
        }
        Err(e) => input_error("check", Some(s.name.clone()), &e),
    }
}

fn solve_status(result: &Result<commonfix::solver::SolveReport, SolveError>) -> Status {
    match result {
        Ok(_) => Status::Ok,
        Err(SolveError::HypothesisFailed { .. }) => Status::HypothesisFailed,
        Err(SolveError::Inconclusive { .. }) => Status::Inconclusive,
        Err(SolveError::Input(_)) => Status::InputError,
        Err(_) => Status::SolveFailed,
    }
}

/// Checks the hypotheses, then runs the two-stage solver (a pair, a
/// combinator reduction, or a chain) and certifies the answer.
pub fn cmd_solve(s: &Scenario, force: bool) -> Report {
    let name = Some(s.name.clone());
    let check = s.check_config();
    let mut cfg = s.solve_config();
    cfg.force = force;
    let solved: Result<(&'static str, Attempt), InputError> = (|| {
        if let Some(p) = pair_problem(s)? {
            let Problem::Pair {
                contractor, dominator, ..
            } = &s.problem
            else {
                unreachable!()
            };
            let method = if s.table.is_combinator(contractor) || s.table.is_combinator(dominator) {
                "reduction"
            } else {
                "pair"
            };
            return Ok((method, solve_common_fixed_point(&p, &s.space, &check, &cfg)));
        }
        if let Some(c) = chain_problem(s)? {
            return Ok(("chain", solve_chain(&c, &s.space, &check, &cfg)));
        }
        Err(InputError::Setting {
            name: "problem.kind".into(),
            message: "solve needs a pair or chain problem; use scan for expansive maps".into(),
        })
    })();
    let (method, attempt) = match solved {
        Ok(v) => v,
        Err(e) => return input_error("solve", name, &e),
    };
    let mut r = Report::new("solve", name, solve_status(&attempt.result));
    r.hypotheses = Some(attempt.hypotheses);
    r.solve = Some(match attempt.result {
        Ok(rep) => SolveSection {
            method,
            forced: force,
            result: Some(rep),
            failure: None,
        },
        Err(e) => SolveSection {
            method,
            forced: force,
            result: e.report().cloned(),
            failure: Some(SolveFailure::from_error(&e)),
        },
    });
    r
}

fn parse_point(text: &str, dim: usize) -> Result<Point, ScenarioError> {
    let coords = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ScenarioError::Invalid {
            field: "--point".into(),
            message: e.to_string(),
        })?;
    let p = Point::new(coords)?;
    if p.dim() != dim {
        return Err(InputError::DimensionMismatch {
            expected: dim,
            got: p.dim(),
        }
        .into());
    }
    Ok(p)
}

/// Residuals of every problem map at `point` and the orbit from it; exit 0
/// iff every residual is within `tol_cert`, else 2.
pub fn cmd_certify(s: &Scenario, point: &str) -> Report {
    let name = Some(s.name.clone());
    let p = match parse_point(point, s.space.dim()) {
        Ok(p) => p,
        Err(e) => return input_error("certify", name, &e),
    };
    let tol_cert = s.solve_config().tol_cert;
    let mut names: Vec<&str> = Vec::new();
    for n in s.problem.map_names() {
        if !names.contains(&n) {
            names.push(n);
        }
    }
    let mut residuals = Vec::new();
    for n in names {
        let m = match named(s, n) {
            Ok(m) => m,
            Err(e) => return input_error("certify", name, &e),
        };
        let residual = m.map.apply(&p).map(|y| s.space.dist(&y, &p)).unwrap_or(f64::INFINITY);
        residuals.push(Residual {
            map: n.to_string(),
            residual,
            certified: residual <= tol_cert,
        });
    }
    let orbit_map = match named(s, s.problem.orbit_map()) {
        Ok(m) => m,
        Err(e) => return input_error("certify", name, &e),
    };
    let orbit = OrbitCheck::run(&orbit_map, &p, &s.space, &s.check_config());
    let certified = residuals.iter().all(|r| r.certified);
    let mut r = Report::new(
        "certify",
        name,
        if certified { Status::Ok } else { Status::SolveFailed },
    );
    r.certify = Some(CertifySection {
        point: p,
        tol_cert,
        residuals,
        orbit,
        certified,
    });
    r
}

/// Expansive check plus a grid scan for fixed points.
///
/// Exit 2 when no candidate exists, otherwise 1 / 4 for a failed /
/// inconclusive hypothesis, 2 when the candidate is not unique, else 0.
pub fn cmd_scan(s: &Scenario) -> Report {
    let name = Some(s.name.clone());
    let Problem::Expansive { map, .. } = &s.problem else {
        let e = InputError::Setting {
            name: "problem.kind".into(),
            message: "scan needs an expansive problem".into(),
        };
        return input_error("scan", name, &e);
    };
    let (h, m) = match hypotheses(s).and_then(|h| Ok((h, named(s, map)?))) {
        Ok(v) => v,
        Err(e) => return input_error("scan", name, &e),
    };
    let scan_cfg = s.scan_config();
    let found = match find_fixed_candidates(&m.map, &s.space, &scan_cfg) {
        Ok(c) => c,
        Err(e) => return input_error("scan", name, &e),
    };
    let check = s.check_config();
    let candidates: Vec<ScannedCandidate> = found
        .into_iter()
        .map(|c| ScannedCandidate {
            orbit: orbit_bounded(&m.map, &c.point, &s.space, &check),
            point: c.point,
            residual: c.residual,
        })
        .collect();
    let status = if candidates.is_empty() {
        Status::SolveFailed
    } else {
        match h.verdict() {
            Verdict::Fail => Status::HypothesisFailed,
            Verdict::Inconclusive => Status::Inconclusive,
            Verdict::Pass if candidates.len() != 1 => Status::SolveFailed,
            Verdict::Pass => Status::Ok,
        }
    };
    let mut r = Report::new("scan", name, status);
    r.hypotheses = Some(h);
    r.scan = Some(ScanSection {
        map: map.clone(),
        tol_cert: scan_cfg.tol_cert,
        candidates,
    });
    r
}
