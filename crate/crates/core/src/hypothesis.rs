//! Numerical checks for the hypotheses of the two-stage common fixed point solver:
//! the contraction condition `d(g(x),g(y)) <= k d(f(x),f(y))`, commutativity,
//! self-mapping, boundedness of the dominator's orbit, and the expansive
//! condition used by the single-map variant.
//!
//! Suprema and infima are estimated by sampling, so a passing contraction
//! check is evidence, not proof: the sampled `k_hat` can only under-estimate
//! the true constant. A margin guards the `k_hat < 1` decision.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::EvalError;
use crate::map::Map;
use crate::metric::{BoxDomain, Point, Space};

/// Fraction of the way toward the box center used for near-diagonal pairs.
const NEAR_PAIR_FRACTION: f64 = 1e-6;
/// Consecutive radius doublings (at steps 1, 2, 4, ...) that mark an orbit as escaping.
const DOUBLING_WINDOWS: u32 = 12;
/// Relative rounding allowance for the commutativity check.
const COMMUTE_REL_TOL: f64 = 1e-12;
/// Cap on the number of violation records kept in a report.
const MAX_VIOLATION_RECORDS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

/// Sampling and tolerance settings for the checks. `None` fields take
/// defaults scaled by the domain diameter.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    /// Number of pairs for ratio estimates, number of points for pointwise checks.
    pub n_samples: usize,
    pub seed: u64,
    pub k_margin: f64,
    pub ratio_floor: Option<f64>,
    pub tol_zero: f64,
    pub tol_commute: Option<f64>,
    pub slack: Option<f64>,
    pub max_steps: usize,
    pub radius_cap: Option<f64>,
    pub tol_step: Option<f64>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            n_samples: 4096,
            seed: 0,
            k_margin: 0.02,
            ratio_floor: None,
            tol_zero: 1e-9,
            tol_commute: None,
            slack: None,
            max_steps: 10_000,
            radius_cap: None,
            tol_step: None,
        }
    }
}

impl CheckConfig {
    pub fn ratio_floor(&self, space: &Space) -> f64 {
        self.ratio_floor.unwrap_or(1e-12 * space.scale())
    }

    pub fn tol_commute(&self, space: &Space) -> f64 {
        self.tol_commute.unwrap_or(1e-9 * (1.0 + space.diameter()))
    }

    pub fn slack(&self, space: &Space) -> f64 {
        self.slack.unwrap_or_else(|| space.default_slack())
    }

    pub fn radius_cap(&self, space: &Space) -> f64 {
        self.radius_cap.unwrap_or(1e6 * space.scale())
    }

    pub fn tol_step(&self, space: &Space) -> f64 {
        self.tol_step.unwrap_or(1e-13 * space.scale())
    }
}

/// Deterministic list of sample pairs over a box, as indices into `points`.
///
/// Pairs come in rounds: round `i` pairs sample point `i` with a nudged copy
/// of itself (near-diagonal, where suprema of monotone maps tend to sit) and
/// then with every earlier sample point. The first `n` pairs are a prefix of
/// the first `n + m` pairs for the same seed.
#[derive(Debug, Clone)]
pub struct PairPlan {
    pub points: Vec<Point>,
    pub pairs: Vec<(usize, usize)>,
}

impl PairPlan {
    pub fn new(dom: &BoxDomain, n_pairs: usize, seed: u64) -> Self {
        let mut rounds = 0usize;
        let mut total = 0usize;
        while total < n_pairs {
            total += rounds + 1;
            rounds += 1;
        }
        let base = dom.sample(rounds, seed);
        let mut points = base.clone();
        points.extend(base.iter().map(|p| dom.nudge(p, NEAR_PAIR_FRACTION)));
        let mut pairs = Vec::with_capacity(n_pairs);
        'outer: for i in 0..rounds {
            for j in std::iter::once(rounds + i).chain(0..i) {
                if pairs.len() == n_pairs {
                    break 'outer;
                }
                pairs.push((j, i));
            }
        }
        PairPlan { points, pairs }
    }

    fn images(&self, m: &Map) -> Result<Vec<Point>, EvalError> {
        apply_all(m, &self.points)
    }
}

/// Applies `m` to every point in parallel; the first failure in input order wins.
fn apply_all(m: &Map, points: &[Point]) -> Result<Vec<Point>, EvalError> {
    points
        .par_iter()
        .map(|p| m.apply(p))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairWitness {
    pub x: Point,
    pub y: Point,
    pub ratio: f64,
}

/// A pair where the dominator collapses the points but the contractor does not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub x: Point,
    pub y: Point,
    pub dominator_dist: f64,
    pub contractor_dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KEstimate {
    pub k_hat: f64,
    pub witness: Option<PairWitness>,
    pub violations: Vec<Violation>,
    pub violation_count: usize,
    pub pairs_used: usize,
    pub pairs_degenerate: usize,
}

/// Sampled estimate of the smallest `k` with
/// `d(g(x),g(y)) <= k d(f(x),f(y))`, `g` the contractor and `f` the dominator.
pub fn estimate_k(contractor: &Map, dominator: &Map, space: &Space, cfg: &CheckConfig) -> Result<KEstimate, EvalError> {
    let plan = PairPlan::new(&space.domain, cfg.n_samples, cfg.seed);
    let gs = plan.images(contractor)?;
    let fs = plan.images(dominator)?;
    let floor = cfg.ratio_floor(space);

    let mut est = KEstimate {
        k_hat: 0.0,
        witness: None,
        violations: Vec::new(),
        violation_count: 0,
        pairs_used: 0,
        pairs_degenerate: 0,
    };
    for &(a, b) in &plan.pairs {
        let (x, y) = (&plan.points[a], &plan.points[b]);
        if space.dist(x, y) == 0.0 {
            continue;
        }
        let df = space.dist(&fs[a], &fs[b]);
        let dg = space.dist(&gs[a], &gs[b]);
        if df <= floor {
            est.pairs_degenerate += 1;
            if dg > cfg.tol_zero {
                est.violation_count += 1;
                if est.violations.len() < MAX_VIOLATION_RECORDS {
                    est.violations.push(Violation {
                        x: x.clone(),
                        y: y.clone(),
                        dominator_dist: df,
                        contractor_dist: dg,
                    });
                }
            }
            continue;
        }
        est.pairs_used += 1;
        let ratio = dg / df;
        if est.witness.is_none() || ratio > est.k_hat {
            est.k_hat = ratio;
            est.witness = Some(PairWitness {
                x: x.clone(),
                y: y.clone(),
                ratio,
            });
        }
    }
    Ok(est)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutativityDefect {
    pub defect: f64,
    pub witness: Option<Point>,
    /// Largest `d(f(g(x)), g(f(x))) / (tol_commute + 1e-12 * |image|)` over
    /// the samples; commuting iff at most 1. The relative term absorbs
    /// rounding in maps with large values.
    pub normalized: f64,
}

/// Largest sampled `d(f(g(x)), g(f(x)))`.
pub fn commutativity_defect(
    f: &Map,
    g: &Map,
    space: &Space,
    cfg: &CheckConfig,
) -> Result<CommutativityDefect, EvalError> {
    let points = space.domain.sample(cfg.n_samples, cfg.seed);
    let fg = apply_all(&Map::compose(f.clone(), g.clone()), &points)?;
    let gf = apply_all(&Map::compose(g.clone(), f.clone()), &points)?;
    let tol = cfg.tol_commute(space);
    let mut out = CommutativityDefect {
        defect: 0.0,
        witness: None,
        normalized: 0.0,
    };
    for (i, p) in points.iter().enumerate() {
        let d = space.dist(&fg[i], &gf[i]);
        if out.witness.is_none() || d > out.defect {
            out.defect = d;
            out.witness = Some(p.clone());
        }
        let size = fg[i]
            .coords()
            .iter()
            .chain(gf[i].coords())
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        out.normalized = out.normalized.max(d / (tol + COMMUTE_REL_TOL * size));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Escape {
    pub x: Point,
    pub image: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfMapResult {
    pub ok: bool,
    pub escaping: Option<Escape>,
}

/// Checks that sampled points are mapped into the space's region (within `slack`).
/// Reports the first escaping sample in sampling order.
pub fn self_map_check(m: &Map, space: &Space, cfg: &CheckConfig) -> Result<SelfMapResult, EvalError> {
    let slack = cfg.slack(space);
    let points = space.domain.sample(cfg.n_samples, cfg.seed);
    let images = apply_all(m, &points)?;
    for (x, image) in points.into_iter().zip(images) {
        if !space.region.contains(&image, slack).unwrap_or(false) {
            return Ok(SelfMapResult {
                ok: false,
                escaping: Some(Escape { x, image }),
            });
        }
    }
    Ok(SelfMapResult {
        ok: true,
        escaping: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundedness {
    Bounded,
    Unbounded,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitResult {
    pub status: Boundedness,
    /// Largest observed distance from the starting point.
    pub radius: f64,
    pub steps: usize,
    pub reason: String,
}

/// Semi-decision of whether the Picard orbit `x0, m(x0), m²(x0), ...` is bounded.
///
/// Unbounded when the orbit leaves the ball of radius `radius_cap`, overflows,
/// or its radius doubles across [`DOUBLING_WINDOWS`] consecutive windows
/// `[2^j, 2^(j+1)]`. Bounded when a step falls below `tol_step`, or when the
/// radius reached at `max_steps / 2` is never exceeded afterwards. Unknown
/// otherwise.
pub fn orbit_bounded(m: &Map, x0: &Point, space: &Space, cfg: &CheckConfig) -> OrbitResult {
    let cap = cfg.radius_cap(space);
    let tol_step = cfg.tol_step(space);
    let half = cfg.max_steps / 2;

    let mut x = x0.clone();
    let mut radius = 0.0_f64;
    let mut half_radius = 0.0_f64;
    let mut checkpoint = 1usize;
    let mut checkpoint_radius = 0.0_f64;
    let mut doublings = 0u32;

    let verdict = |status, radius, steps, reason: String| OrbitResult {
        status,
        radius,
        steps,
        reason,
    };

    for n in 1..=cfg.max_steps {
        let y = match m.apply(&x) {
            Ok(y) => y,
            Err(e) if e.is_overflow() => {
                return verdict(Boundedness::Unbounded, radius, n, format!("overflow at step {n}"))
            }
            Err(e) => return verdict(Boundedness::Unknown, radius, n, format!("step {n}: {e}")),
        };
        let from_start = space.dist(&y, x0);
        let step = space.dist(&y, &x);
        radius = radius.max(from_start);
        if !from_start.is_finite() || from_start > cap {
            return verdict(
                Boundedness::Unbounded,
                radius,
                n,
                format!("left the ball of radius {cap} at step {n}"),
            );
        }
        if step < tol_step {
            return verdict(
                Boundedness::Bounded,
                radius,
                n,
                format!("numerically stationary at step {n}"),
            );
        }
        if n == checkpoint {
            if checkpoint_radius > 0.0 {
                if radius >= 2.0 * checkpoint_radius {
                    doublings += 1;
                } else {
                    doublings = 0;
                }
            }
            if doublings >= DOUBLING_WINDOWS {
                return verdict(
                    Boundedness::Unbounded,
                    radius,
                    n,
                    format!("radius doubled over {doublings} consecutive windows up to step {n}"),
                );
            }
            checkpoint_radius = radius;
            checkpoint *= 2;
        }
        if n == half {
            half_radius = radius;
        }
        x = y;
    }
    if half > 0 && radius <= half_radius * (1.0 + 1e-9) {
        verdict(
            Boundedness::Bounded,
            radius,
            cfg.max_steps,
            format!(
                "stayed within radius {half_radius} over the last {} steps",
                cfg.max_steps - half
            ),
        )
    } else {
        verdict(
            Boundedness::Unknown,
            radius,
            cfg.max_steps,
            format!("radius still growing after {} steps", cfg.max_steps),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansiveEstimate {
    pub k_low: f64,
    pub witness: Option<PairWitness>,
}

/// Sampled minimum of `d(fⁿ(x), fⁿ(y)) / d(x, y)`.
pub fn expansive_check(f: &Map, n: u32, space: &Space, cfg: &CheckConfig) -> Result<ExpansiveEstimate, EvalError> {
    let fn_map = Map::iterate(f.clone(), n.max(1));
    let plan = PairPlan::new(&space.domain, cfg.n_samples, cfg.seed);
    let images = plan.images(&fn_map)?;
    let mut out = ExpansiveEstimate {
        k_low: f64::INFINITY,
        witness: None,
    };
    for &(a, b) in &plan.pairs {
        let (x, y) = (&plan.points[a], &plan.points[b]);
        let dxy = space.dist(x, y);
        if dxy == 0.0 {
            continue;
        }
        let ratio = space.dist(&images[a], &images[b]) / dxy;
        if ratio < out.k_low {
            out.k_low = ratio;
            out.witness = Some(PairWitness {
                x: x.clone(),
                y: y.clone(),
                ratio,
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Aggregated, named report
// ---------------------------------------------------------------------------

/// A map together with the name it carries in a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedMap {
    pub name: String,
    pub map: Map,
}

impl NamedMap {
    pub fn new(name: impl Into<String>, map: Map) -> Self {
        NamedMap { name: name.into(), map }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionCheck {
    pub contractor: String,
    pub dominator: String,
    pub k_hat: Option<f64>,
    pub k_declared: Option<f64>,
    pub k_margin: f64,
    pub witness: Option<PairWitness>,
    pub violations: Vec<Violation>,
    pub violation_count: usize,
    pub pairs_used: usize,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl ContractionCheck {
    pub fn run(
        contractor: &NamedMap,
        dominator: &NamedMap,
        k_declared: Option<f64>,
        space: &Space,
        cfg: &CheckConfig,
    ) -> Self {
        let mut out = ContractionCheck {
            contractor: contractor.name.clone(),
            dominator: dominator.name.clone(),
            k_hat: None,
            k_declared,
            k_margin: cfg.k_margin,
            witness: None,
            violations: Vec::new(),
            violation_count: 0,
            pairs_used: 0,
            verdict: Verdict::Fail,
            note: None,
        };
        let est = match estimate_k(&contractor.map, &dominator.map, space, cfg) {
            Ok(est) => est,
            Err(e) => {
                out.note = Some(e.to_string());
                return out;
            }
        };
        out.witness = est.witness;
        out.violations = est.violations;
        out.violation_count = est.violation_count;
        out.pairs_used = est.pairs_used;
        if est.pairs_used > 0 {
            out.k_hat = Some(est.k_hat);
        }
        out.verdict = if est.violation_count > 0 {
            out.note = Some("dominator collapses pairs the contractor separates".into());
            Verdict::Fail
        } else if est.pairs_used == 0 {
            out.note = Some("every sampled pair is degenerate under the dominator".into());
            Verdict::Inconclusive
        } else if est.k_hat >= 1.0 - cfg.k_margin {
            out.note = Some(format!("k_hat {} is not below 1 - margin", est.k_hat));
            Verdict::Fail
        } else if k_declared.is_some_and(|k| est.k_hat > k) {
            out.note = Some("k_hat exceeds the declared constant".into());
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutativityCheck {
    pub maps: [String; 2],
    pub defect: Option<f64>,
    pub witness: Option<Point>,
    pub tolerance: f64,
    pub normalized_defect: Option<f64>,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl CommutativityCheck {
    pub fn run(a: &NamedMap, b: &NamedMap, space: &Space, cfg: &CheckConfig) -> Self {
        let tolerance = cfg.tol_commute(space);
        let maps = [a.name.clone(), b.name.clone()];
        match commutativity_defect(&a.map, &b.map, space, cfg) {
            Ok(d) => CommutativityCheck {
                maps,
                defect: Some(d.defect),
                witness: d.witness,
                tolerance,
                normalized_defect: Some(d.normalized),
                verdict: if d.normalized <= 1.0 {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                },
                note: None,
            },
            Err(e) => CommutativityCheck {
                maps,
                defect: None,
                witness: None,
                tolerance,
                normalized_defect: None,
                verdict: Verdict::Fail,
                note: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfMapCheck {
    pub map: String,
    pub ok: bool,
    pub escaping: Option<Escape>,
    pub slack: f64,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl SelfMapCheck {
    pub fn run(m: &NamedMap, space: &Space, cfg: &CheckConfig) -> Self {
        let slack = cfg.slack(space);
        match self_map_check(&m.map, space, cfg) {
            Ok(r) => SelfMapCheck {
                map: m.name.clone(),
                ok: r.ok,
                escaping: r.escaping,
                slack,
                verdict: if r.ok { Verdict::Pass } else { Verdict::Fail },
                note: None,
            },
            Err(e) => SelfMapCheck {
                map: m.name.clone(),
                ok: false,
                escaping: None,
                slack,
                verdict: Verdict::Fail,
                note: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitCheck {
    pub map: String,
    pub x0: Point,
    #[serde(flatten)]
    pub result: OrbitResult,
    pub verdict: Verdict,
}

impl OrbitCheck {
    pub fn run(m: &NamedMap, x0: &Point, space: &Space, cfg: &CheckConfig) -> Self {
        let result = orbit_bounded(&m.map, x0, space, cfg);
        let verdict = match result.status {
            Boundedness::Bounded => Verdict::Pass,
            Boundedness::Unbounded => Verdict::Fail,
            Boundedness::Unknown => Verdict::Inconclusive,
        };
        OrbitCheck {
            map: m.name.clone(),
            x0: x0.clone(),
            result,
            verdict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansiveCheck {
    pub map: String,
    pub n: u32,
    pub k_low: Option<f64>,
    pub witness: Option<PairWitness>,
    pub k_margin: f64,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl ExpansiveCheck {
    pub fn run(m: &NamedMap, n: u32, space: &Space, cfg: &CheckConfig) -> Self {
        let mut out = ExpansiveCheck {
            map: m.name.clone(),
            n,
            k_low: None,
            witness: None,
            k_margin: cfg.k_margin,
            verdict: Verdict::Fail,
            note: None,
        };
        match expansive_check(&m.map, n, space, cfg) {
            Ok(est) if est.witness.is_some() => {
                out.k_low = Some(est.k_low);
                out.witness = est.witness;
                out.verdict = if est.k_low > 1.0 + cfg.k_margin {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                };
            }
            Ok(_) => {
                out.note = Some("no sampled pair of distinct points".into());
                out.verdict = Verdict::Inconclusive;
            }
            Err(e) => out.note = Some(e.to_string()),
        }
        out
    }
}

/// All hypothesis verdicts for one problem.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct HypothesisReport {
    pub contraction: Vec<ContractionCheck>,
    pub commutativity: Vec<CommutativityCheck>,
    pub self_mapping: Vec<SelfMapCheck>,
    pub orbit: Option<OrbitCheck>,
    pub expansive: Option<ExpansiveCheck>,
}

impl HypothesisReport {
    /// Contraction, commutativity, self-mapping and dominator-orbit checks for
    /// the pair `g - k - f`; `extra` maps must also commute with both and map
    /// the space into itself.
    pub fn for_pair(
        contractor: &NamedMap,
        dominator: &NamedMap,
        k_declared: Option<f64>,
        extra: &[NamedMap],
        x0: &Point,
        space: &Space,
        cfg: &CheckConfig,
    ) -> Self {
        let mut r = HypothesisReport {
            contraction: vec![ContractionCheck::run(contractor, dominator, k_declared, space, cfg)],
            commutativity: vec![CommutativityCheck::run(dominator, contractor, space, cfg)],
            self_mapping: vec![
                SelfMapCheck::run(contractor, space, cfg),
                SelfMapCheck::run(dominator, space, cfg),
            ],
            orbit: Some(OrbitCheck::run(dominator, x0, space, cfg)),
            expansive: None,
        };
        for e in extra {
            r.commutativity.push(CommutativityCheck::run(e, dominator, space, cfg));
            r.commutativity.push(CommutativityCheck::run(e, contractor, space, cfg));
            r.self_mapping.push(SelfMapCheck::run(e, space, cfg));
        }
        r
    }

    /// Checks for the chain `h - k - g`, `g - k' - f`: both contraction
    /// pairs, all three commutators, self-mapping, and the orbit of `f`.
    pub fn for_chain(f: &NamedMap, g: &NamedMap, h: &NamedMap, x0: &Point, space: &Space, cfg: &CheckConfig) -> Self {
        HypothesisReport {
            contraction: vec![
                ContractionCheck::run(h, g, None, space, cfg),
                ContractionCheck::run(g, f, None, space, cfg),
            ],
            commutativity: vec![
                CommutativityCheck::run(f, g, space, cfg),
                CommutativityCheck::run(g, h, space, cfg),
                CommutativityCheck::run(f, h, space, cfg),
            ],
            self_mapping: vec![
                SelfMapCheck::run(f, space, cfg),
                SelfMapCheck::run(g, space, cfg),
                SelfMapCheck::run(h, space, cfg),
            ],
            orbit: Some(OrbitCheck::run(f, x0, space, cfg)),
            expansive: None,
        }
    }

    /// Checks for a single expansive map: the expansive bound and self-mapping.
    pub fn for_expansive(m: &NamedMap, n: u32, space: &Space, cfg: &CheckConfig) -> Self {
        HypothesisReport {
            self_mapping: vec![SelfMapCheck::run(m, space, cfg)],
            expansive: Some(ExpansiveCheck::run(m, n, space, cfg)),
            ..Default::default()
        }
    }

    fn verdicts(&self) -> impl Iterator<Item = (String, Verdict)> + '_ {
        let c = self
            .contraction
            .iter()
            .map(|c| (format!("contraction {} - k - {}", c.contractor, c.dominator), c.verdict));
        let m = self
            .commutativity
            .iter()
            .map(|c| (format!("commutativity of {} and {}", c.maps[0], c.maps[1]), c.verdict));
        let s = self
            .self_mapping
            .iter()
            .map(|s| (format!("self-mapping of {}", s.map), s.verdict));
        let o = self
            .orbit
            .iter()
            .map(|o| (format!("bounded orbit of {}", o.map), o.verdict));
        let e = self
            .expansive
            .iter()
            .map(|e| (format!("expansive bound of {}", e.map), e.verdict));
        c.chain(m).chain(s).chain(o).chain(e)
    }

    pub fn verdict(&self) -> Verdict {
        self.verdicts().fold(Verdict::Pass, |acc, (_, v)| acc.combine(v))
    }

    /// Names of the hypotheses that did not pass.
    pub fn failures(&self) -> Vec<String> {
        self.verdicts()
            .filter(|(_, v)| *v != Verdict::Pass)
            .map(|(name, v)| match v {
                Verdict::Inconclusive => format!("{name} (inconclusive)"),
                _ => name,
            })
            .collect()
    }

    /// The contraction estimate of the first pair, if any.
    pub fn k_hat(&self) -> Option<f64> {
        self.contraction.first().and_then(|c| c.k_hat)
    }
}
