//! Points, box domains and metrics: the concrete complete metric space every
//! other module runs on.

use std::fmt;
use std::ops::Index;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::InputError;

/// Corners are enumerated only up to this dimension; beyond it sampling is center plus random fill.
const MAX_CORNER_DIM: usize = 16;

/// A point of ℝᵈ with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, InputError> {
        if coords.is_empty() {
            return Err(InputError::EmptyPoint);
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(InputError::NonFinite { index, value });
        }
        Ok(Point(coords))
    }

    /// Builds a point without the finiteness check. Callers guarantee the invariant.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Point(coords)
    }

    pub fn scalar(x: f64) -> Result<Self, InputError> {
        Self::new(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

fn check_dims(expected: usize, got: usize) -> Result<(), InputError> {
    if expected != got {
        return Err(InputError::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Chebyshev,
    Manhattan,
}

impl Metric {
    pub fn dist(&self, x: &Point, y: &Point) -> Result<f64, InputError> {
        check_dims(x.dim(), y.dim())?;
        Ok(self.dist_slices(x.coords(), y.coords()))
    }

    /// Distance on raw coordinate slices of equal length.
    pub fn dist_slices(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
        match self {
            Metric::Euclidean => {
                // scaled 2-norm, avoids overflow/underflow of the squares
                let scale = diffs.clone().fold(0.0_f64, f64::max);
                if scale == 0.0 || !scale.is_finite() {
                    return scale;
                }
                scale * diffs.map(|d| (d / scale).powi(2)).sum::<f64>().sqrt()
            }
            Metric::Chebyshev => diffs.fold(0.0, f64::max),
            Metric::Manhattan => diffs.sum(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Chebyshev => "chebyshev",
            Metric::Manhattan => "manhattan",
        }
    }
}

/// An axis-aligned box `[lower, upper]` in ℝᵈ. Zero-width axes are allowed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDomain {
    lower: Point,
    upper: Point,
}

impl BoxDomain {
    pub fn new(lower: Point, upper: Point) -> Result<Self, InputError> {
        check_dims(lower.dim(), upper.dim())?;
        for axis in 0..lower.dim() {
            if lower[axis] > upper[axis] {
                return Err(InputError::InvertedBox {
                    axis,
                    lower: lower[axis],
                    upper: upper[axis],
                });
            }
        }
        Ok(BoxDomain { lower, upper })
    }

    /// One-dimensional interval `[a, b]`.
    pub fn interval(a: f64, b: f64) -> Result<Self, InputError> {
        Self::new(Point::scalar(a)?, Point::scalar(b)?)
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> &Point {
        &self.upper
    }

    pub fn diameter(&self, metric: Metric) -> f64 {
        metric.dist_slices(self.lower.coords(), self.upper.coords())
    }

    pub fn center(&self) -> Point {
        Point::from_vec(
            self.lower
                .coords()
                .iter()
                .zip(self.upper.coords())
                .map(|(a, b)| a + 0.5 * (b - a))
                .collect(),
        )
    }

    /// Corner selected by `mask`: bit `i` set picks the upper bound on axis `i`.
    pub fn corner(&self, mask: u64) -> Point {
        Point::from_vec(
            (0..self.dim())
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        self.upper[i]
                    } else {
                        self.lower[i]
                    }
                })
                .collect(),
        )
    }

    fn corner_count(&self) -> u64 {
        if self.dim() > MAX_CORNER_DIM {
            0
        } else {
            1 << self.dim()
        }
    }

    /// All 2ᵈ corners, lower corner first.
    pub fn corners(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.corner_count()).map(move |mask| self.corner(mask))
    }

    /// The corner maximizing the distance to `x`; ties go to the lowest mask.
    pub fn farthest_corner(&self, x: &Point, metric: Metric) -> Result<Point, InputError> {
        check_dims(self.dim(), x.dim())?;
        let mut best = self.corner(0);
        let mut best_d = metric.dist_slices(best.coords(), x.coords());
        for c in self.corners().skip(1) {
            let d = metric.dist_slices(c.coords(), x.coords());
            if d > best_d {
                best_d = d;
                best = c;
            }
        }
        Ok(best)
    }

    pub fn contains(&self, x: &Point, slack: f64) -> Result<bool, InputError> {
        check_dims(self.dim(), x.dim())?;
        Ok(x.coords()
            .iter()
            .enumerate()
            .all(|(i, &v)| self.lower[i] - slack <= v && v <= self.upper[i] + slack))
    }

    /// Deterministic sample of `n` points: corners, then the center, then
    /// uniform pseudo-random fill. `sample(m, seed)` is a prefix of
    /// `sample(n, seed)` for `m <= n`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Point> {
        let mut out: Vec<Point> = self.corners().take(n).collect();
        if out.len() < n {
            out.push(self.center());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while out.len() < n {
            let coords = (0..self.dim())
                .map(|i| {
                    let (a, b) = (self.lower[i], self.upper[i]);
                    let u: f64 = rng.gen();
                    (a + u * (b - a)).clamp(a, b)
                })
                .collect();
            out.push(Point::from_vec(coords));
        }
        out
    }

    /// A point at fraction `frac` of the way from `x` toward the center
    /// (toward the upper corner when `x` is the center). Stays inside the box.
    pub fn nudge(&self, x: &Point, frac: f64) -> Point {
        let center = self.center();
        let target = if x == &center { &self.upper } else { &center };
        Point::from_vec(
            x.coords()
                .iter()
                .zip(target.coords())
                .enumerate()
                .map(|(i, (a, t))| (a + frac * (t - a)).clamp(self.lower[i], self.upper[i]))
                .collect(),
        )
    }
}

/// Per-axis bounds that may be infinite. Describes the ambient space a map
/// must send the domain into; it defaults to the sampling box itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, InputError> {
        check_dims(lower.len(), upper.len())?;
        for axis in 0..lower.len() {
            if lower[axis].is_nan() || upper[axis].is_nan() {
                return Err(InputError::NanBound { axis });
            }
            if lower[axis] > upper[axis] {
                return Err(InputError::InvertedBox {
                    axis,
                    lower: lower[axis],
                    upper: upper[axis],
                });
            }
        }
        Ok(Region { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &Point, slack: f64) -> Result<bool, InputError> {
        check_dims(self.dim(), x.dim())?;
        Ok(x.coords()
            .iter()
            .enumerate()
            .all(|(i, &v)| self.lower[i] - slack <= v && v <= self.upper[i] + slack))
    }

    /// True when `dom` lies inside this region.
    pub fn covers(&self, dom: &BoxDomain) -> bool {
        self.dim() == dom.dim()
            && (0..self.dim()).all(|i| self.lower[i] <= dom.lower()[i] && dom.upper()[i] <= self.upper[i])
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
}

impl From<&BoxDomain> for Region {
    fn from(dom: &BoxDomain) -> Self {
        Region {
            lower: dom.lower().coords().to_vec(),
            upper: dom.upper().coords().to_vec(),
        }
    }
}

/// The metric space a problem lives in: a sampling box, the region maps must
/// stay inside, and the distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Space {
    pub domain: BoxDomain,
    pub region: Region,
    pub metric: Metric,
}

impl Space {
    /// Space whose region is the box itself.
    pub fn boxed(domain: BoxDomain, metric: Metric) -> Self {
        let region = Region::from(&domain);
        Space { domain, region, metric }
    }

    pub fn with_region(domain: BoxDomain, region: Region, metric: Metric) -> Result<Self, InputError> {
        check_dims(domain.dim(), region.dim())?;
        if !region.covers(&domain) {
            return Err(InputError::Setting {
                name: "domain".into(),
                message: "space bounds must contain the sampling box".into(),
            });
        }
        Ok(Space { domain, region, metric })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn dist(&self, x: &Point, y: &Point) -> f64 {
        self.metric.dist_slices(x.coords(), y.coords())
    }

    pub fn diameter(&self) -> f64 {
        self.domain.diameter(self.metric)
    }

    /// Diameter used to scale default tolerances; 1 for a single-point box.
    pub fn scale(&self) -> f64 {
        let d = self.diameter();
        if d > 0.0 {
            d
        } else {
            1.0
        }
    }

    /// Default containment slack, 1e-9 of the domain scale.
    pub fn default_slack(&self) -> f64 {
        1e-9 * self.scale()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn dist_examples() {
        assert_eq!(Metric::Euclidean.dist(&p(&[0.0, 0.0]), &p(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(Metric::Chebyshev.dist(&p(&[1.0, 2.0]), &p(&[4.0, 3.0])).unwrap(), 3.0);
        assert_eq!(Metric::Manhattan.dist(&p(&[1.0, 2.0]), &p(&[4.0, 3.0])).unwrap(), 4.0);
        for m in [Metric::Euclidean, Metric::Chebyshev, Metric::Manhattan] {
            assert_eq!(m.dist(&p(&[0.3, -7.0]), &p(&[0.3, -7.0])).unwrap(), 0.0);
        }
    }

    #[test]
    fn dist_dimension_mismatch() {
        let err = Metric::Euclidean.dist(&p(&[0.0]), &p(&[0.0, 1.0])).unwrap_err();
        assert_eq!(err, InputError::DimensionMismatch { expected: 1, got: 2 });
    }

    #[test]
    fn point_rejects_non_finite() {
        assert!(matches!(
            Point::new(vec![1.0, f64::NAN]),
            Err(InputError::NonFinite { index: 1, .. })
        ));
        assert_eq!(Point::new(vec![]), Err(InputError::EmptyPoint));
    }

    #[test]
    fn contains_examples() {
        let unit = BoxDomain::interval(0.0, 1.0).unwrap();
        assert!(unit.contains(&p(&[0.5]), 0.0).unwrap());
        assert!(unit.contains(&p(&[1.0 + 1e-12]), 1e-9).unwrap());
        assert!(!unit.contains(&p(&[1.0 + 1e-12]), 0.0).unwrap());
        let ex2 = BoxDomain::interval(0.5, 0.75).unwrap();
        assert!(!ex2.contains(&p(&[3.6945]), 1e-9).unwrap());
        assert!(unit.contains(&p(&[0.5, 0.5]), 0.0).is_err());
    }

    #[test]
    fn inverted_box_rejected() {
        assert!(matches!(
            BoxDomain::interval(2.0, 1.0),
            Err(InputError::InvertedBox { axis: 0, .. })
        ));
        assert!(BoxDomain::interval(1.0, 1.0).is_ok());
    }

    #[test]
    fn sample_is_deterministic_and_inside() {
        let unit = BoxDomain::interval(0.0, 1.0).unwrap();
        assert_eq!(unit.sample(3, 7), unit.sample(3, 7));
        let sq = BoxDomain::new(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap();
        let pts = sq.sample(8, 0);
        for c in [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] {
            assert!(pts.contains(&p(&c)), "missing corner {c:?}");
        }
        assert!(pts.contains(&p(&[0.5, 0.5])));
        let b = BoxDomain::new(p(&[-3.0, 2.0, 0.0]), p(&[1.0, 2.0, 1e-3])).unwrap();
        for x in b.sample(500, 11) {
            assert!(b.contains(&x, 0.0).unwrap());
        }
    }

    #[test]
    fn sample_prefix_nested() {
        let b = BoxDomain::new(p(&[0.0, 0.0]), p(&[2.0, 1.0])).unwrap();
        let small = b.sample(20, 3);
        let large = b.sample(200, 3);
        assert_eq!(&large[..20], &small[..]);
    }

    #[test]
    fn farthest_corner_picks_opposite() {
        let b = BoxDomain::new(p(&[-1.0, -1.0]), p(&[1.0, 1.0])).unwrap();
        let c = b.farthest_corner(&p(&[0.9, -0.2]), Metric::Euclidean).unwrap();
        assert_eq!(c, p(&[-1.0, 1.0]));
    }

    #[test]
    fn nudge_stays_inside() {
        let b = BoxDomain::interval(1.0, 10.0).unwrap();
        let n = b.nudge(&p(&[1.0]), 1e-6);
        assert!(n[0] > 1.0 && n[0] < 1.0 + 1e-5);
        let c = b.nudge(&b.center(), 1e-6);
        assert!(c[0] > 5.5);
    }

    #[test]
    fn region_with_infinite_bound() {
        let r = Region::new(vec![1.0], vec![f64::INFINITY]).unwrap();
        assert!(r.contains(&p(&[1e300]), 0.0).unwrap());
        assert!(!r.contains(&p(&[0.5]), 1e-9).unwrap());
        let dom = BoxDomain::interval(1.0, 10.0).unwrap();
        assert!(Space::with_region(dom.clone(), r, Metric::Euclidean).is_ok());
        let narrow = Region::new(vec![2.0], vec![3.0]).unwrap();
        assert!(Space::with_region(dom, narrow, Metric::Euclidean).is_err());
    }
}
