//! The two Picard stages.
//!
//! Stage A iterates `u ↦ f(g(u))` from `x0`. Its steps obey
//! `d(u_{n+1}, u_n) <= s * k^n`, so after `n` steps the limit `l` is within
//! `s k^n / (1 - k)` (a priori) or `d(u_n, u_{n-1}) k / (1 - k)` (a posteriori).
//!
//! Stage B iterates `g` from `l`. Because `g∘f` fixes `l`, the steps satisfy
//! `d(v_n, v_{n-1}) <= c * k^((n-1)/2)` with
//! `c = max{d(g(l), l), sqrt(k) d(f(l), l)}`, giving the bounds
//! `c k^(n/2) / (1 - sqrt(k))` and `d(v_n, v_{n-1}) sqrt(k) / (1 - sqrt(k))`.

use serde::Serialize;

use crate::map::Map;
use crate::metric::{Point, Space};
use crate::solver::{selected, SolveConfig, SolveError, Stage};

/// Relative slack on the envelope checks.
const ENVELOPE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub n: usize,
    /// Distance between iterates `n` and `n - 1`.
    pub step: f64,
    /// A-priori bound on the distance from iterate `n` to the limit.
    pub apriori: f64,
    /// A-posteriori bound on the distance from iterate `n` to the limit.
    pub aposteriori: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageA {
    pub l: Point,
    pub iters: usize,
    pub s_hat: f64,
    pub apriori: f64,
    pub aposteriori: f64,
    pub trace: Vec<TraceStep>,
    /// Steps exceeding `s_hat * k^(n-1)` when re-checked after the run.
    pub envelope_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageB {
    pub l1: Point,
    pub iters: usize,
    pub c_hat: f64,
    pub apriori: f64,
    pub aposteriori: f64,
    pub trace: Vec<TraceStep>,
    /// Steps exceeding `c_hat * k^((n-1)/2)`.
    pub envelope_violations: usize,
}

fn check_inside(space: &Space, x: &Point, slack: f64, stage: Stage, step: usize) -> Result<(), SolveError> {
    if space.region.contains(x, slack).unwrap_or(false) {
        Ok(())
    } else {
        Err(SolveError::SelfMapping {
            stage,
            step,
            point: x.clone(),
        })
    }
}

/// Iterates `f∘g` from `cfg.x0` until the selected bound drops to `cfg.tol`.
///
/// `s_hat` is the running maximum of `d(u_n, u_{n-1}) / k^(n-1)`.
pub fn stage_a(f: &Map, g: &Map, space: &Space, cfg: &SolveConfig, k: f64) -> Result<StageA, SolveError> {
    let slack = cfg.slack(space);
    let fg = Map::compose(f.clone(), g.clone());
    let mut u = cfg.x0.clone();
    let mut s_hat = 0.0_f64;
    let mut k_pow = 1.0_f64; // k^(n-1)
    let mut trace = Vec::new();
    let mut bound = f64::INFINITY;

    for n in 1..=cfg.max_iter {
        let next = fg.apply(&u).map_err(|source| SolveError::Eval {
            stage: Stage::A,
            source,
        })?;
        check_inside(space, &next, slack, Stage::A, n)?;
        let step = space.dist(&next, &u);
        if step > 0.0 {
            s_hat = s_hat.max(if k_pow > 0.0 { step / k_pow } else { f64::INFINITY });
        }
        k_pow *= k;
        let apriori = if s_hat == 0.0 { 0.0 } else { s_hat * k_pow / (1.0 - k) };
        let aposteriori = step * k / (1.0 - k);
        trace.push(TraceStep {
            n,
            step,
            apriori,
            aposteriori,
        });
        u = next;
        bound = selected(cfg.bound_mode, apriori, aposteriori);
        if bound <= cfg.tol {
            let envelope_violations = trace
                .iter()
                .filter(|t| t.step > s_hat * k.powi(t.n as i32 - 1) * (1.0 + ENVELOPE_REL_TOL))
                .count();
            return Ok(StageA {
                l: u,
                iters: n,
                s_hat,
                apriori,
                aposteriori,
                trace,
                envelope_violations,
            });
        }
    }
    Err(SolveError::NonConvergence {
        stage: Stage::A,
        iters: cfg.max_iter,
        last_bound: bound,
    })
}

/// Iterates `g` from `l` until the selected bound drops to `cfg.tol`.
/// Returns immediately with zero iterations when `l` is already fixed by both maps.
pub fn stage_b(f: &Map, g: &Map, space: &Space, l: &Point, cfg: &SolveConfig, k: f64) -> Result<StageB, SolveError> {
    let slack = cfg.slack(space);
    let eval = |m: &Map, x: &Point| {
        m.apply(x).map_err(|source| SolveError::Eval {
            stage: Stage::B,
            source,
        })
    };
    let sqrt_k = k.sqrt();
    let gl = eval(g, l)?;
    let fl = eval(f, l)?;
    let c_hat = space.dist(&gl, l).max(sqrt_k * space.dist(&fl, l));
    if c_hat == 0.0 {
        return Ok(StageB {
            l1: l.clone(),
            iters: 0,
            c_hat,
            apriori: 0.0,
            aposteriori: 0.0,
            trace: Vec::new(),
            envelope_violations: 0,
        });
    }

    let mut v = l.clone();
    let mut next = gl;
    let mut trace = Vec::new();
    let mut violations = 0;
    let mut bound = f64::INFINITY;
    for n in 1..=cfg.max_iter {
        if n > 1 {
            next = eval(g, &v)?;
        }
        check_inside(space, &next, slack, Stage::B, n)?;
        let step = space.dist(&next, &v);
        let envelope = c_hat * k.powf((n - 1) as f64 / 2.0);
        if step > envelope * (1.0 + ENVELOPE_REL_TOL) {
            violations += 1;
        }
        let apriori = c_hat * k.powf(n as f64 / 2.0) / (1.0 - sqrt_k);
        let aposteriori = step * sqrt_k / (1.0 - sqrt_k);
        trace.push(TraceStep {
            n,
            step,
            apriori,
            aposteriori,
        });
        v = next.clone();
        bound = selected(cfg.bound_mode, apriori, aposteriori);
        if bound <= cfg.tol {
            return Ok(StageB {
                l1: v,
                iters: n,
                c_hat,
                apriori,
                aposteriori,
                trace,
                envelope_violations: violations,
            });
        }
    }
    Err(SolveError::NonConvergence {
        stage: Stage::B,
        iters: cfg.max_iter,
        last_bound: bound,
    })
}
