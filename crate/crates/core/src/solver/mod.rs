//! Constructive solver for the common fixed point of a contraction pair
//! `g - k - f` (commuting `f`, `g` with `d(g(x),g(y)) <= k d(f(x),f(y))`).
//!
//! [`solve_common_fixed_point`] checks the hypotheses, runs Stage A
//! (`f∘g` from `x0`) and Stage B (`g` from the Stage-A limit), certifies the
//! answer against `f`, `g` and `f∘g`, then probes uniqueness from a second
//! start. [`solve_chain`] and [`solve_reduction`] reduce the three-map and
//! combinator variants to the same pair solve.

mod scan;
mod stages;

use serde::Serialize;
use thiserror::Error;

use crate::error::{EvalError, InputError};
use crate::hypothesis::{orbit_bounded, Boundedness, CheckConfig, HypothesisReport, NamedMap, Verdict};
use crate::map::{Map, MapTable};
use crate::metric::{Point, Space};

pub use scan::{find_fixed_candidates, Candidate, ScanConfig};
pub use stages::{stage_a, stage_b, StageA, StageB, TraceStep};

/// Upper clamp for the constant used in the bounds.
pub const K_CEIL: f64 = 0.999;
/// Lower clamp, keeps `k^n` away from exact zero.
pub const K_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    Apriori,
    #[default]
    Aposteriori,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stage {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub x0: Point,
    /// Target distance to the limit.
    pub tol: f64,
    pub max_iter: usize,
    /// Residual tolerance for certification.
    pub tol_cert: f64,
    pub bound_mode: BoundMode,
    /// Containment slack for iterates; `None` uses the space default.
    pub slack: Option<f64>,
    /// Solve even when hypotheses fail.
    pub force: bool,
    /// Re-solve from a second start to probe uniqueness.
    pub probe: bool,
}

impl SolveConfig {
    pub fn new(x0: Point) -> Self {
        SolveConfig {
            x0,
            tol: 1e-10,
            max_iter: 100_000,
            tol_cert: 1e-8,
            bound_mode: BoundMode::Aposteriori,
            slack: None,
            force: false,
            probe: true,
        }
    }

    pub fn validate(&self) -> Result<(), InputError> {
        let bad = |name: &str, message: &str| {
            Err(InputError::Setting {
                name: name.into(),
                message: message.into(),
            })
        };
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol", "must be positive and finite");
        }
        if !(self.tol_cert > 0.0 && self.tol_cert.is_finite()) {
            return bad("tol_cert", "must be positive and finite");
        }
        if self.tol >= self.tol_cert {
            return bad("tol", "must be smaller than tol_cert");
        }
        if self.max_iter == 0 {
            return bad("max_iter", "must be at least 1");
        }
        Ok(())
    }

    pub fn slack(&self, space: &Space) -> f64 {
        self.slack.unwrap_or_else(|| space.default_slack())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("hypotheses failed: {}", .failures.join("; "))]
    HypothesisFailed { failures: Vec<String> },

    #[error("hypotheses inconclusive: {}", .reasons.join("; "))]
    Inconclusive { reasons: Vec<String> },

    #[error("stage {stage:?} did not converge in {iters} iterations (last bound {last_bound:e})")]
    NonConvergence {
        stage: Stage,
        iters: usize,
        last_bound: f64,
    },

    #[error("stage {stage:?} left the space at step {step}: {point}")]
    SelfMapping { stage: Stage, step: usize, point: Point },

    #[error("stage {stage:?}: {source}")]
    Eval { stage: Stage, source: EvalError },

    #[error("certification failed: {}", .failed.join(", "))]
    CertificationFailed {
        failed: Vec<String>,
        report: Box<SolveReport>,
    },

    #[error("uniqueness probe found a second answer at distance {distance:e}")]
    UniquenessViolated { distance: f64, report: Box<SolveReport> },

    #[error(transparent)]
    Input(#[from] InputError),
}

impl SolveError {
    /// The partial report attached to post-convergence failures.
    pub fn report(&self) -> Option<&SolveReport> {
        match self {
            SolveError::CertificationFailed { report, .. } | SolveError::UniquenessViolated { report, .. } => {
                Some(report)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertRole {
    Dominator,
    Contractor,
    /// `f∘g`
    Composite,
    /// A map the problem requires to share the fixed point.
    Required,
    /// A base map of a combinator; reported, not required.
    Base,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub map: String,
    pub role: CertRole,
    pub residual: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeStatus {
    Passed,
    Failed,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub second_start: Point,
    pub answer: Option<Point>,
    pub distance: Option<f64>,
    pub status: ProbeStatus,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainConstants {
    /// Estimate for `h - k - g`.
    pub k_hg: f64,
    /// Estimate for `g - k' - f`.
    pub k_gf: f64,
    /// `k_hg * k_gf`
    pub k_chain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub x0: Point,
    /// Stage-A limit.
    pub l: Point,
    /// Stage-B limit: the common fixed point.
    pub l1: Point,
    pub iters_a: usize,
    pub iters_b: usize,
    pub s_hat: f64,
    pub c_hat: f64,
    pub k_hat: Option<f64>,
    pub k_used: f64,
    pub bound_mode: BoundMode,
    pub bound_a: f64,
    pub bound_b: f64,
    pub apriori_a: f64,
    pub aposteriori_a: f64,
    pub apriori_b: f64,
    pub aposteriori_b: f64,
    /// `d(f(l1), l1)` for the dominator `f`.
    pub residual_f: f64,
    /// `d(g(l1), l1)` for the contractor `g`.
    pub residual_g: f64,
    /// `d(f(g(l1)), l1)`
    pub residual_fg: f64,
    pub envelope_violations_a: usize,
    pub envelope_violations_b: usize,
    pub certifications: Vec<Certification>,
    pub chain: Option<ChainConstants>,
    pub unique_probe: Option<ProbeReport>,
    #[serde(skip)]
    pub trace_a: Vec<TraceStep>,
    #[serde(skip)]
    pub trace_b: Vec<TraceStep>,
}

/// Hypothesis verdicts plus the solve outcome.
#[derive(Debug, Clone)]
pub struct Attempt {
    pub hypotheses: HypothesisReport,
    pub result: Result<SolveReport, SolveError>,
}

/// Pair problem `contractor - k - dominator`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairProblem {
    pub contractor: NamedMap,
    pub dominator: NamedMap,
    pub k_declared: Option<f64>,
    /// Maps that must commute with the pair and share its fixed point.
    pub certify_also: Vec<NamedMap>,
    /// Base maps whose residuals are reported without being required.
    pub base_maps: Vec<NamedMap>,
}

impl PairProblem {
    pub fn new(contractor: NamedMap, dominator: NamedMap) -> Self {
        PairProblem {
            contractor,
            dominator,
            k_declared: None,
            certify_also: Vec::new(),
            base_maps: Vec::new(),
        }
    }
}

/// Three maps with `h - k - g` and `g - k' - f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainProblem {
    pub f: NamedMap,
    pub g: NamedMap,
    pub h: NamedMap,
}

/// Constant used for the bounds: the larger of the estimate and the declared
/// constant, inflated by the sampling margin and clamped to `[K_FLOOR, K_CEIL]`.
pub fn k_used(k_hat: Option<f64>, k_declared: Option<f64>, k_margin: f64) -> f64 {
    let base = match (k_hat, k_declared) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => K_CEIL,
    };
    if !base.is_finite() {
        return K_CEIL;
    }
    (base / (1.0 - k_margin)).clamp(K_FLOOR, K_CEIL)
}

fn gate(hypotheses: &HypothesisReport, force: bool) -> Result<(), SolveError> {
    if force {
        return Ok(());
    }
    match hypotheses.verdict() {
        Verdict::Pass => Ok(()),
        Verdict::Fail => Err(SolveError::HypothesisFailed {
            failures: hypotheses.failures(),
        }),
        Verdict::Inconclusive => Err(SolveError::Inconclusive {
            reasons: hypotheses.failures(),
        }),
    }
}

fn residual(m: &Map, p: &Point, space: &Space) -> f64 {
    match m.apply(p) {
        Ok(y) => space.dist(&y, p),
        Err(_) => f64::INFINITY,
    }
}

/// Runs both stages for the pair from `cfg.x0` with constant `k`.
fn run_stages(problem: &PairProblem, space: &Space, cfg: &SolveConfig, k: f64) -> Result<(StageA, StageB), SolveError> {
    let a = stage_a(&problem.dominator.map, &problem.contractor.map, space, cfg, k)?;
    let b = stage_b(&problem.dominator.map, &problem.contractor.map, space, &a.l, cfg, k)?;
    Ok((a, b))
}

fn certify(problem: &PairProblem, l1: &Point, space: &Space, cfg: &SolveConfig) -> Vec<Certification> {
    let fg = Map::compose(problem.dominator.map.clone(), problem.contractor.map.clone());
    let mut out = vec![
        (
            problem.dominator.name.clone(),
            CertRole::Dominator,
            residual(&problem.dominator.map, l1, space),
        ),
        (
            problem.contractor.name.clone(),
            CertRole::Contractor,
            residual(&problem.contractor.map, l1, space),
        ),
        (
            format!("{}∘{}", problem.dominator.name, problem.contractor.name),
            CertRole::Composite,
            residual(&fg, l1, space),
        ),
    ];
    for m in &problem.certify_also {
        out.push((m.name.clone(), CertRole::Required, residual(&m.map, l1, space)));
    }
    for m in &problem.base_maps {
        if m.name != problem.dominator.name && m.name != problem.contractor.name {
            out.push((m.name.clone(), CertRole::Base, residual(&m.map, l1, space)));
        }
    }
    out.into_iter()
        .map(|(map, role, residual)| Certification {
            map,
            role,
            residual,
            certified: residual <= cfg.tol_cert,
        })
        .collect()
}

/// Re-solves from the domain corner farthest from `x0` and compares answers.
pub fn uniqueness_probe(
    problem: &PairProblem,
    space: &Space,
    check: &CheckConfig,
    cfg: &SolveConfig,
    k: f64,
    answer: &Point,
) -> ProbeReport {
    let second_start = match space.domain.farthest_corner(&cfg.x0, space.metric) {
        Ok(p) => p,
        Err(e) => {
            return ProbeReport {
                second_start: cfg.x0.clone(),
                answer: None,
                distance: None,
                status: ProbeStatus::Inconclusive,
                reason: Some(e.to_string()),
            }
        }
    };
    let inconclusive = |reason: String| ProbeReport {
        second_start: second_start.clone(),
        answer: None,
        distance: None,
        status: ProbeStatus::Inconclusive,
        reason: Some(reason),
    };
    let orbit = orbit_bounded(&problem.dominator.map, &second_start, space, check);
    if orbit.status != Boundedness::Bounded {
        return inconclusive(format!(
            "orbit of {} from the second start is not known to be bounded: {}",
            problem.dominator.name, orbit.reason
        ));
    }
    let second_cfg = SolveConfig {
        x0: second_start.clone(),
        ..cfg.clone()
    };
    match run_stages(problem, space, &second_cfg, k) {
        Ok((_, b)) => {
            let distance = space.dist(&b.l1, answer);
            let passed = distance <= 2.0 * cfg.tol_cert;
            ProbeReport {
                second_start,
                answer: Some(b.l1),
                distance: Some(distance),
                status: if passed {
                    ProbeStatus::Passed
                } else {
                    ProbeStatus::Failed
                },
                reason: None,
            }
        }
        Err(e) => inconclusive(format!("second solve failed: {e}")),
    }
}

fn solve_with_k(
    problem: &PairProblem,
    space: &Space,
    check: &CheckConfig,
    cfg: &SolveConfig,
    k_hat: Option<f64>,
    k: f64,
) -> Result<SolveReport, SolveError> {
    let (a, b) = run_stages(problem, space, cfg, k)?;
    let certifications = certify(problem, &b.l1, space, cfg);
    let find = |role| {
        certifications
            .iter()
            .find(|c| c.role == role)
            .map(|c| c.residual)
            .unwrap_or(f64::INFINITY)
    };
    let mut report = SolveReport {
        x0: cfg.x0.clone(),
        l: a.l.clone(),
        l1: b.l1.clone(),
        iters_a: a.iters,
        iters_b: b.iters,
        s_hat: a.s_hat,
        c_hat: b.c_hat,
        k_hat,
        k_used: k,
        bound_mode: cfg.bound_mode,
        bound_a: selected(cfg.bound_mode, a.apriori, a.aposteriori),
        bound_b: selected(cfg.bound_mode, b.apriori, b.aposteriori),
        apriori_a: a.apriori,
        aposteriori_a: a.aposteriori,
        apriori_b: b.apriori,
        aposteriori_b: b.aposteriori,
        residual_f: find(CertRole::Dominator),
        residual_g: find(CertRole::Contractor),
        residual_fg: find(CertRole::Composite),
        envelope_violations_a: a.envelope_violations,
        envelope_violations_b: b.envelope_violations,
        certifications,
        chain: None,
        unique_probe: None,
        trace_a: a.trace,
        trace_b: b.trace,
    };
    let failed: Vec<String> = report
        .certifications
        .iter()
        .filter(|c| c.role != CertRole::Base && !c.certified)
        .map(|c| format!("{} (residual {:e})", c.map, c.residual))
        .collect();
    if !failed.is_empty() {
        return Err(SolveError::CertificationFailed {
            failed,
            report: Box::new(report),
        });
    }
    if cfg.probe {
        let probe = uniqueness_probe(problem, space, check, cfg, k, &report.l1);
        let failed = probe.status == ProbeStatus::Failed;
        let distance = probe.distance.unwrap_or(f64::NAN);
        report.unique_probe = Some(probe);
        if failed {
            return Err(SolveError::UniquenessViolated {
                distance,
                report: Box::new(report),
            });
        }
    }
    Ok(report)
}

pub(crate) fn selected(mode: BoundMode, apriori: f64, aposteriori: f64) -> f64 {
    match mode {
        BoundMode::Apriori => apriori,
        BoundMode::Aposteriori => aposteriori,
    }
}

/// Checks the hypotheses for `contractor - k - dominator`, then solves and
/// certifies. Hypothesis failures stop the solve unless `cfg.force` is set.
pub fn solve_common_fixed_point(
    problem: &PairProblem,
    space: &Space,
    check: &CheckConfig,
    cfg: &SolveConfig,
) -> Attempt {
    let hypotheses = HypothesisReport::for_pair(
        &problem.contractor,
        &problem.dominator,
        problem.k_declared,
        &problem.certify_also,
        &cfg.x0,
        space,
        check,
    );
    let result = cfg.validate().map_err(SolveError::from).and_then(|_| {
        gate(&hypotheses, cfg.force)?;
        let k_hat = hypotheses.k_hat();
        let k = k_used(k_hat, problem.k_declared, check.k_margin);
        solve_with_k(problem, space, check, cfg, k_hat, k)
    });
    Attempt { hypotheses, result }
}

/// Solves the three-map chain `h - k - g`, `g - k' - f` as the pair
/// `h - kk' - f` and certifies the answer for all three maps.
pub fn solve_chain(problem: &ChainProblem, space: &Space, check: &CheckConfig, cfg: &SolveConfig) -> Attempt {
    let hypotheses = HypothesisReport::for_chain(&problem.f, &problem.g, &problem.h, &cfg.x0, space, check);
    let pair = PairProblem {
        contractor: problem.h.clone(),
        dominator: problem.f.clone(),
        k_declared: None,
        certify_also: vec![problem.g.clone()],
        base_maps: Vec::new(),
    };
    let result = cfg.validate().map_err(SolveError::from).and_then(|_| {
        gate(&hypotheses, cfg.force)?;
        let k_hg = hypotheses.contraction[0].k_hat;
        let k_gf = hypotheses.contraction[1].k_hat;
        let k = (k_used(k_hg, None, check.k_margin) * k_used(k_gf, None, check.k_margin)).clamp(K_FLOOR, K_CEIL);
        let mut report = solve_with_k(&pair, space, check, cfg, k_hg.zip(k_gf).map(|(a, b)| a * b), k)?;
        if let (Some(k_hg), Some(k_gf)) = (k_hg, k_gf) {
            report.chain = Some(ChainConstants {
                k_hg,
                k_gf,
                k_chain: k_hg * k_gf,
            });
        }
        Ok(report)
    });
    Attempt { hypotheses, result }
}

/// Solves a pair whose maps are built with `compose` / `iterate` from named
/// maps in `table`, reporting for every underlying expression map whether it
/// shares the fixed point.
pub fn solve_reduction(
    table: &MapTable,
    contractor: &str,
    dominator: &str,
    k_declared: Option<f64>,
    space: &Space,
    check: &CheckConfig,
    cfg: &SolveConfig,
) -> Result<Attempt, InputError> {
    let problem = reduction_problem(table, contractor, dominator, k_declared)?;
    Ok(solve_common_fixed_point(&problem, space, check, cfg))
}

/// Builds the pair problem for [`solve_reduction`].
pub fn reduction_problem(
    table: &MapTable,
    contractor: &str,
    dominator: &str,
    k_declared: Option<f64>,
) -> Result<PairProblem, InputError> {
    let mut base = table.base_maps(contractor)?;
    for name in table.base_maps(dominator)? {
        if !base.contains(&name) {
            base.push(name);
        }
    }
    let base_maps = base
        .iter()
        .map(|n| Ok(NamedMap::new(n.clone(), table.resolve(n)?)))
        .collect::<Result<Vec<_>, InputError>>()?;
    Ok(PairProblem {
        contractor: NamedMap::new(contractor, table.resolve(contractor)?),
        dominator: NamedMap::new(dominator, table.resolve(dominator)?),
        k_declared,
        certify_also: Vec::new(),
        base_maps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::MapDef;
    use crate::metric::{BoxDomain, Metric, Region};

    fn interval(a: f64, b: f64) -> Space {
        Space::boxed(BoxDomain::interval(a, b).unwrap(), Metric::Euclidean)
    }

    fn half_line(a: f64, b: f64) -> Space {
        Space::with_region(
            BoxDomain::interval(a, b).unwrap(),
            Region::new(vec![a], vec![f64::INFINITY]).unwrap(),
            Metric::Euclidean,
        )
        .unwrap()
    }

    fn named(name: &str, src: &str) -> NamedMap {
        NamedMap::new(name, Map::parse(src, 1).unwrap())
    }

    fn cfg(x0: f64) -> SolveConfig {
        SolveConfig::new(Point::scalar(x0).unwrap())
    }

    #[test]
    fn k_used_inflates_and_clamps() {
        assert!((k_used(Some(0.49), None, 0.02) - 0.5).abs() < 1e-15);
        assert_eq!(k_used(Some(0.99), None, 0.02), K_CEIL);
        assert_eq!(k_used(Some(0.0), None, 0.02), K_FLOOR);
        assert!((k_used(Some(0.3), Some(0.49), 0.02) - 0.5).abs() < 1e-15);
        assert_eq!(k_used(None, None, 0.02), K_CEIL);
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(0.0);
        assert!(c.validate().is_ok());
        c.tol = 1e-7;
        assert!(matches!(c.validate(), Err(InputError::Setting { .. })));
    }

    #[test]
    fn example_one_power_pair() {
        let p = PairProblem::new(named("f", "x^2"), named("g", "x^3"));
        let at = solve_common_fixed_point(&p, &half_line(1.0, 10.0), &CheckConfig::default(), &cfg(1.0));
        assert_eq!(at.hypotheses.verdict(), Verdict::Pass, "{:?}", at.hypotheses.failures());
        let r = at.result.unwrap();
        assert_eq!(r.l1[0], 1.0);
        assert_eq!(r.residual_f, 0.0);
        assert_eq!(r.residual_g, 0.0);
        assert_eq!(r.iters_a, 1);
        assert_eq!(r.iters_b, 0);
        assert_eq!(r.unique_probe.unwrap().status, ProbeStatus::Inconclusive);
    }

    #[test]
    fn noncommuting_pair_is_rejected() {
        let p = PairProblem::new(named("g", "2*x"), named("f", "x+1"));
        let at = solve_common_fixed_point(&p, &interval(0.0, 1.0), &CheckConfig::default(), &cfg(0.0));
        assert!(matches!(at.result, Err(SolveError::HypothesisFailed { .. })));
    }

    #[test]
    fn linear_pair_probe_passes() {
        let p = PairProblem::new(named("g", "x/4"), named("f", "x/2"));
        let at = solve_common_fixed_point(&p, &interval(-1.0, 1.0), &CheckConfig::default(), &cfg(1.0));
        let r = at.result.unwrap();
        assert!(r.l1[0].abs() < 1e-10);
        let probe = r.unique_probe.unwrap();
        assert_eq!(probe.second_start[0], -1.0);
        assert_eq!(probe.status, ProbeStatus::Passed);
    }

    #[test]
    fn forced_solve_reports_certification_failure() {
        // x+1 and x/2 do not share a fixed point; forcing the solve fails at the first step out of the box
        let p = PairProblem::new(named("g", "x/2"), named("f", "x+1"));
        let mut c = cfg(0.0);
        c.force = true;
        let at = solve_common_fixed_point(&p, &interval(0.0, 1.0), &CheckConfig::default(), &c);
        assert!(
            matches!(at.result, Err(SolveError::SelfMapping { .. })),
            "{:?}",
            at.result
        );
    }

    #[test]
    fn chain_of_powers() {
        let chain = ChainProblem {
            f: named("f", "x^8"),
            g: named("g", "x^4"),
            h: named("h", "x^2"),
        };
        let at = solve_chain(&chain, &half_line(1.0, 2.0), &CheckConfig::default(), &cfg(1.0));
        let r = at.result.unwrap();
        assert_eq!(r.l1[0], 1.0);
        let c = r.chain.unwrap();
        assert!((c.k_hg - 0.5).abs() < 1e-3 && (c.k_gf - 0.5).abs() < 1e-3);
        assert!((c.k_chain - 0.25).abs() < 1e-3);
        assert!(r.certifications.iter().any(|c| c.map == "g" && c.certified));
    }

    #[test]
    fn reduction_of_iterate() {
        let mut t = MapTable::new(1);
        t.insert_expr("g", "x/2").unwrap();
        t.insert("f", MapDef::Identity).unwrap();
        t.insert("g2", MapDef::Iterate { of: "g".into(), n: 2 }).unwrap();
        t.insert("f1", MapDef::Iterate { of: "f".into(), n: 1 }).unwrap();
        let at = solve_reduction(
            &t,
            "g2",
            "f1",
            None,
            &interval(-1.0, 1.0),
            &CheckConfig::default(),
            &cfg(1.0),
        )
        .unwrap();
        let r = at.result.unwrap();
        assert!(r.l1[0].abs() < 1e-10);
        let g = r.certifications.iter().find(|c| c.map == "g").unwrap();
        assert_eq!(g.role, CertRole::Base);
        assert!(g.certified);
    }
}
