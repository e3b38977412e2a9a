use serde::Serialize;

use super::space::FiniteMetricSpace;
use crate::error::{Error, Result};

/// Largest size for which the upper bound is computed exactly.
pub const EXACT_GH_LIMIT: usize = 9;

/// A relation between two finite spaces covering both of them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn new(pairs: Vec<(usize, usize)>, nx: usize, ny: usize) -> Result<Self> {
        let mut seen_x = vec![false; nx];
        let mut seen_y = vec![false; ny];
        for &(a, b) in &pairs {
            if a >= nx || b >= ny {
                return Err(Error::InvalidArgument(format!("pair ({a}, {b}) is out of range")));
            }
            seen_x[a] = true;
            seen_y[b] = true;
        }
        if let Some(a) = seen_x.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("point {a} of X is not covered")));
        }
        if let Some(b) = seen_y.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("point {b} of Y is not covered")));
        }
        Ok(Self { pairs })
    }

    /// `sup |d_X(x, x') - d_Y(y, y')|` over pairs of related pairs.
    pub fn distortion(&self, x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
        let mut worst: f64 = 0.0;
        for &(a, b) in &self.pairs {
            for &(c, d) in &self.pairs {
                worst = worst.max((x.d(a, c) - y.d(b, d)).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhBounds {
    pub lower: f64,
    pub upper: f64,
    /// True when `upper` is the exact minimum over correspondences.
    pub exact: bool,
    pub correspondence: Correspondence,
}

/// Hausdorff distance between two finite sets of reals.
fn hausdorff_1d(a: &[f64], b: &[f64]) -> f64 {
    let one_way = |p: &[f64], q: &[f64]| {
        p.iter().map(|s| q.iter().map(|t| (s - t).abs()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Bounds on the Gromov–Hausdorff distance.
///
/// The lower bound is `max(|diam X - diam Y|, d_H(ecc X, ecc Y)) / 2`, valid
/// for every correspondence because related points have eccentricities within
/// the distortion. The upper bound is half the distortion of the best
/// correspondence: exact by constraint search when both sizes are at most
/// [`EXACT_GH_LIMIT`], otherwise the eccentricity-matching correspondence or,
/// for equal sizes, the index pairing `i <-> i` when that does better. The
/// index pairing matters for homogeneous spaces, where every eccentricity is
/// equal and the matching collapses onto one point.
pub fn gh_bounds(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> GhBounds {
    let (ex, ey) = (x.eccentricities(), y.eccentricities());
    let lower = 0.5 * (x.diameter() - y.diameter()).abs().max(hausdorff_1d(&ex, &ey));
    if x.len() <= EXACT_GH_LIMIT && y.len() <= EXACT_GH_LIMIT {
        let (t, pairs) = exact_min_distortion(x, y);
        return GhBounds { lower, upper: 0.5 * t, exact: true, correspondence: Correspondence { pairs } };
    }
    let closest = |e: f64, pool: &[f64]| {
        (0..pool.len()).min_by(|&i, &j| (pool[i] - e).abs().total_cmp(&(pool[j] - e).abs())).expect("nonempty")
    };
    let mut pairs: Vec<(usize, usize)> = (0..x.len()).map(|a| (a, closest(ex[a], &ey))).collect();
    pairs.extend((0..y.len()).map(|b| (closest(ey[b], &ex), b)));
    pairs.sort_unstable();
    pairs.dedup();
    let mut c = Correspondence { pairs };
    if x.len() == y.len() {
        let ident = Correspondence { pairs: (0..x.len()).map(|i| (i, i)).collect() };
        if ident.distortion(x, y) < c.distortion(x, y) {
            c = ident;
        }
    }
    GhBounds { lower, upper: 0.5 * c.distortion(x, y), exact: false, correspondence: c }
}

/// Smallest distortion over all correspondences, with a minimizer.
///
/// Every correspondence contains one of the form `graph(f) + graph(g)^T`
/// with no larger distortion, so it suffices to search maps `f: X -> Y`
/// plus partners for the points of `Y` that `f` misses. The optimum is one
/// of the values `|d_X - d_Y|`; a binary search over them calls a
/// backtracking feasibility test.
fn exact_min_distortion(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> (f64, Vec<(usize, usize)>) {
    let (nx, ny) = (x.len(), y.len());
    let mut cand = vec![0.0];
    for a in 0..nx {
        for c in 0..nx {
            for b in 0..ny {
                for d in 0..ny {
                    cand.push((x.d(a, c) - y.d(b, d)).abs());
                }
            }
        }
    }
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let (mut lo, mut hi) = (0, cand.len() - 1);
    let mut best = feasible(x, y, cand[hi]).expect("the full relation is a correspondence");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match feasible(x, y, cand[mid]) {
            Some(p) => {
                best = p;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    (cand[lo], best)
}

fn feasible(x: &FiniteMetricSpace, y: &FiniteMetricSpace, t: f64) -> Option<Vec<(usize, usize)>> {
    struct Search<'a> {
        x: &'a FiniteMetricSpace,
        y: &'a FiniteMetricSpace,
        t: f64,
        pairs: Vec<(usize, usize)>,
        covered: Vec<usize>,
    }
    impl Search<'_> {
        fn fits(&self, a: usize, b: usize) -> bool {
            self.pairs.iter().all(|&(c, d)| (self.x.d(a, c) - self.y.d(b, d)).abs() <= self.t)
        }
        fn push(&mut self, a: usize, b: usize) {
            self.pairs.push((a, b));
            self.covered[b] += 1;
        }
        fn pop(&mut self) {
            let (_, b) = self.pairs.pop().expect("nonempty");
            self.covered[b] -= 1;
        }
        fn assign_x(&mut self, a: usize) -> bool {
            if a == self.x.len() {
                return self.cover_y(0);
            }
            for b in 0..self.y.len() {
                if self.fits(a, b) {
                    self.push(a, b);
                    if self.assign_x(a + 1) {
                        return true;
                    }
                    self.pop();
                }
            }
            false
        }
        fn cover_y(&mut self, b: usize) -> bool {
            if b == self.y.len() {
                return true;
            }
            if self.covered[b] > 0 {
                return self.cover_y(b + 1);
            }
            for a in 0..self.x.len() {
                if self.fits(a, b) {
                    self.push(a, b);
                    if self.cover_y(b + 1) {
                        return true;
                    }
                    self.pop();
                }
            }
            false
        }
    }
    let mut s = Search { x, y, t, pairs: Vec::new(), covered: vec![0; y.len()] };
    s.assign_x(0).then_some(s.pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryReport {
    pub eps: f64,
    pub distortion: f64,
    pub worst_pair: Option<(usize, usize)>,
    /// `sup_y min_x d_Y(y, f(x))`.
    pub image_gap: f64,
    pub pass: bool,
}

/// Is `f: X -> Y` an `eps`-isometry: distortion at most `eps` and an image
/// that is an `eps`-net of `Y`?
pub fn epsilon_isometry_check(
    f: &[usize],
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    eps: f64,
) -> Result<IsometryReport> {
    if f.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: f.len() });
    }
    if let Some(&bad) = f.iter().find(|&&v| v >= y.len()) {
        return Err(Error::InvalidArgument(format!("image index {bad} is outside Y")));
    }
    let mut distortion: f64 = 0.0;
    let mut worst_pair = None;
    for a in 0..x.len() {
        for b in a + 1..x.len() {
            let dev = (y.d(f[a], f[b]) - x.d(a, b)).abs();
            if dev > distortion {
                distortion = dev;
                worst_pair = Some((a, b));
            }
        }
    }
    let image_gap =
        (0..y.len()).map(|v| f.iter().map(|&u| y.d(v, u)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    Ok(IsometryReport { eps, distortion, worst_pair, image_gap, pass: distortion <= eps && image_gap <= eps })
}
