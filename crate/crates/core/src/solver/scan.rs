//! Grid scan for fixed-point candidates of a single map, used when no
//! constructive iteration is available (expansive maps).

use serde::Serialize;

use crate::error::InputError;
use crate::map::Map;
use crate::metric::{Point, Space};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_SCAN_DIM: usize = 3;
const REFINE_SWEEPS: usize = 60;
const GOLDEN_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    /// Grid nodes per axis; `None` picks 1001, 201 or 41 for d = 1, 2, 3.
    pub grid_n: Option<usize>,
    pub tol_cert: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            grid_n: None,
            tol_cert: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub point: Point,
    /// `d(f(point), point)`
    pub residual: f64,
}

fn residual(f: &Map, x: &[f64], space: &Space) -> f64 {
    let p = Point::from_vec(x.to_vec());
    match f.apply(&p) {
        Ok(y) => space.dist(&y, &p),
        Err(_) => f64::INFINITY,
    }
}

/// Golden-section minimization of `r` along `axis` on `[lo, hi]`.
fn golden(f: &Map, space: &Space, x: &mut [f64], axis: usize, lo: f64, hi: f64) -> f64 {
    let eval = |x: &mut [f64], v: f64| {
        x[axis] = v;
        residual(f, x, space)
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(x, c);
    let mut fd = eval(x, d);
    for _ in 0..GOLDEN_ITERS {
        if (b - a).abs() <= f64::EPSILON * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(x, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(x, d);
        }
    }
    // best of the interior probes and the search interval ends
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for v in [lo, hi] {
        let r = eval(x, v);
        if r < best.1 {
            best = (v, r);
        }
    }
    x[axis] = best.0;
    best.1
}

/// Coordinate-wise golden-section descent from a grid node, with the search
/// half-width starting at one grid spacing and halving every sweep.
fn refine(f: &Map, space: &Space, start: &[f64], spacing: &[f64]) -> (Vec<f64>, f64) {
    let lower = space.domain.lower().coords();
    let upper = space.domain.upper().coords();
    let mut x = start.to_vec();
    let mut r = residual(f, &x, space);
    let mut width = spacing.to_vec();
    for _ in 0..REFINE_SWEEPS {
        if r == 0.0 {
            break;
        }
        for axis in 0..x.len() {
            if width[axis] == 0.0 {
                continue;
            }
            let lo = (x[axis] - width[axis]).max(lower[axis]);
            let hi = (x[axis] + width[axis]).min(upper[axis]);
            let keep = x[axis];
            let r_new = golden(f, space, &mut x, axis, lo, hi);
            if r_new <= r {
                r = r_new;
            } else {
                x[axis] = keep;
            }
            width[axis] *= 0.5;
        }
    }
    (x, r)
}

/// Scans a uniform grid over the domain for local minima of `d(f(x), x)`,
/// refines each, and returns those with residual at most `tol_cert`,
/// deduplicated within `10 * tol_cert` (the smaller residual wins).
pub fn find_fixed_candidates(f: &Map, space: &Space, cfg: &ScanConfig) -> Result<Vec<Candidate>, InputError> {
    let d = space.dim();
    if d > MAX_SCAN_DIM {
        return Err(InputError::Setting {
            name: "dimension".into(),
            message: format!("grid scan supports at most {MAX_SCAN_DIM} dimensions, got {d}"),
        });
    }
    let n = cfg.grid_n.unwrap_or(match d {
        1 => 1001,
        2 => 201,
        _ => 41,
    });
    if n < 2 {
        return Err(InputError::Setting {
            name: "grid_n".into(),
            message: "need at least 2 nodes per axis".into(),
        });
    }
    let lower = space.domain.lower().coords();
    let upper = space.domain.upper().coords();
    let spacing: Vec<f64> = (0..d).map(|i| (upper[i] - lower[i]) / (n - 1) as f64).collect();
    let node = |idx: &[usize]| -> Vec<f64> {
        (0..d)
            .map(|i| {
                if idx[i] == n - 1 {
                    upper[i]
                } else {
                    lower[i] + idx[i] as f64 * spacing[i]
                }
            })
            .collect()
    };

    let total = n.pow(d as u32);
    let unflatten = |mut flat: usize| -> Vec<usize> {
        let mut idx = vec![0; d];
        for slot in idx.iter_mut() {
            *slot = flat % n;
            flat /= n;
        }
        idx
    };
    let values: Vec<f64> = (0..total).map(|k| residual(f, &node(&unflatten(k)), space)).collect();

    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let o = (k % 3) as i64 - 1;
                    k /= 3;
                    o
                })
                .collect()
        })
        .filter(|o: &Vec<i64>| o.iter().any(|&v| v != 0))
        .collect();

    let mut found: Vec<Candidate> = Vec::new();
    for k in 0..total {
        let v = values[k];
        if !v.is_finite() {
            continue;
        }
        let idx = unflatten(k);
        let is_min = offsets.iter().all(|off| {
            let mut flat = 0usize;
            let mut stride = 1usize;
            for i in 0..d {
                let j = idx[i] as i64 + off[i];
                if j < 0 || j >= n as i64 {
                    return true;
                }
                flat += j as usize * stride;
                stride *= n;
            }
            v <= values[flat]
        });
        if !is_min {
            continue;
        }
        let (x, r) = refine(f, space, &node(&idx), &spacing);
        if r <= cfg.tol_cert {
            found.push(Candidate {
                point: Point::from_vec(x),
                residual: r,
            });
        }
    }

    // dedupe: best residual first, then drop anything within 10 * tol_cert of a kept point
    found.sort_by(|a, b| {
        a.residual
            .total_cmp(&b.residual)
            .then_with(|| cmp_coords(&a.point, &b.point))
    });
    let radius = 10.0 * cfg.tol_cert;
    let mut kept: Vec<Candidate> = Vec::new();
    for c in found {
        if kept.iter().all(|k| space.dist(&k.point, &c.point) > radius) {
            kept.push(c);
        }
    }
    kept.sort_by(|a, b| cmp_coords(&a.point, &b.point));
    Ok(kept)
}

fn cmp_coords(a: &Point, b: &Point) -> std::cmp::Ordering {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}
