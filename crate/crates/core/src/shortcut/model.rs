use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{fit_line, log_add, log_sinh};

/// Radius of the lattice stencil: every primitive step `(a, b)` with
/// `max(|a|, |b|) <= STENCIL_RADIUS` is an edge.
const STENCIL_RADIUS: i32 = 3;

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Primitive lattice steps of the stencil, sorted by angle.
pub fn stencil() -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for a in -STENCIL_RADIUS..=STENCIL_RADIUS {
        for b in -STENCIL_RADIUS..=STENCIL_RADIUS {
            if (a, b) != (0, 0) && gcd(a, b) == 1 {
                out.push((a, b));
            }
        }
    }
    out.sort_by(|x, y| {
        let ax = (x.1 as f64).atan2(x.0 as f64);
        let ay = (y.1 as f64).atan2(y.0 as f64);
        ax.total_cmp(&ay)
    });
    out
}

/// Largest angle between consecutive stencil directions.
pub fn stencil_angular_resolution() -> f64 {
    let s = stencil();
    let angles: Vec<f64> = s.iter().map(|(a, b)| (*b as f64).atan2(*a as f64)).collect();
    let mut gap: f64 = 0.0;
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap.max(angles[0] + 2.0 * std::f64::consts::PI - angles[angles.len() - 1])
}

/// A grid-aligned straight piece of the reduced shortcut set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShortcutSegment {
    pub start: [f64; 2],
    pub end: [f64; 2],
}

impl ShortcutSegment {
    /// The segment `r2 = 1`, `1 <= r1 <= extent` used by the experiments.
    pub fn along_first_factor(extent: f64) -> Self {
        Self { start: [1.0, 1.0], end: [extent, 1.0] }
    }
}

/// The reduced `(r1, r2)`-plane model of `d_eta`: a Euclidean quarter plane
/// discretized by a lattice graph, plus a segment along which motion in the
/// cheap direction costs `sqrt(eta)` per unit length.
#[derive(Debug, Clone, Serialize)]
pub struct ShortcutModel {
    pub n: usize,
    pub eta: f64,
    pub spacing: f64,
    pub extent: f64,
    pub segment: ShortcutSegment,
    /// Unit vector scaled by `sqrt(eta)` inside the shortcut (the first factor).
    pub cheap_dir: [f64; 2],
    #[serde(skip)]
    side: usize,
    #[serde(skip)]
    seg_nodes: Vec<usize>,
    #[serde(skip)]
    seg_step: (i32, i32),
    #[serde(skip)]
    seg_pos: Vec<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem {
    d: f64,
    v: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.d.total_cmp(&self.d).then_with(|| other.v.cmp(&self.v))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths on the model graph.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub source: usize,
    pub dist: Vec<f64>,
    pub pred: Vec<u32>,
}

impl ShortcutModel {
    pub fn new(n: usize, eta: f64, spacing: f64, extent: f64, segment: ShortcutSegment) -> Result<Self> {
        if n < 3 {
            return Err(Error::HypothesisViolation(format!("factor dimension must be >= 3, got {n}")));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidArgument(format!("eta must lie in (0, 1], got {eta}")));
        }
        if !(spacing > 0.0 && spacing <= 0.05) {
            return Err(Error::Precondition(format!("grid spacing must lie in (0, 0.05], got {spacing}")));
        }
        let cells = extent / spacing;
        if !(extent > 0.0) || (cells - cells.round()).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "extent {extent} must be a positive multiple of the spacing {spacing}"
            )));
        }
        let side = cells.round() as usize + 1;
        let mut m = Self {
            n,
            eta,
            spacing,
            extent,
            segment,
            cheap_dir: [1.0, 0.0],
            side,
            seg_nodes: Vec::new(),
            seg_step: (0, 0),
            seg_pos: Vec::new(),
        };
        let a = m.grid_index_exact(segment.start)?;
        let b = m.grid_index_exact(segment.end)?;
        let (di, dj) = (b.0 as i32 - a.0 as i32, b.1 as i32 - a.1 as i32);
        let g = gcd(di, dj);
        if g == 0 {
            return Err(Error::InvalidArgument("shortcut segment has zero length".into()));
        }
        m.seg_step = (di / g, dj / g);
        m.seg_pos = vec![-1; side * side];
        for t in 0..=g {
            let i = (a.0 as i32 + t * m.seg_step.0) as usize;
            let j = (a.1 as i32 + t * m.seg_step.1) as usize;
            let v = i * side + j;
            m.seg_pos[v] = t;
            m.seg_nodes.push(v);
        }
        Ok(m)
    }

    /// The acceptance-scale model: the default segment on a `spacing` grid of
    /// half-width `extent`.
    pub fn standard(n: usize, eta: f64, spacing: f64, extent: f64) -> Result<Self> {
        Self::new(n, eta, spacing, extent, ShortcutSegment::along_first_factor(extent))
    }

    /// Same grid and segment with another `eta`.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.n, eta, self.spacing, self.extent, self.segment)
    }

    fn grid_index_exact(&self, p: [f64; 2]) -> Result<(usize, usize)> {
        let (i, j) = self.snap(p)?;
        let q = self.coords(i * self.side + j);
        if (q[0] - p[0]).abs() > 1e-9 || (q[1] - p[1]).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("segment endpoint ({}, {}) is not a grid node", p[0], p[1])));
        }
        Ok((i, j))
    }

    fn snap(&self, p: [f64; 2]) -> Result<(usize, usize)> {
        let tol = 1e-9;
        if !(p[0] >= -tol && p[1] >= -tol && p[0] <= self.extent + tol && p[1] <= self.extent + tol) {
            return Err(Error::OutOfExtent(p[0], p[1]));
        }
        let i = ((p[0] / self.spacing).round() as usize).min(self.side - 1);
        let j = ((p[1] / self.spacing).round() as usize).min(self.side - 1);
        Ok((i, j))
    }

    /// Index of the grid node nearest to `p`.
    pub fn node(&self, p: [f64; 2]) -> Result<usize> {
        self.snap(p).map(|(i, j)| i * self.side + j)
    }

    pub fn coords(&self, v: usize) -> [f64; 2] {
        [(v / self.side) as f64 * self.spacing, (v % self.side) as f64 * self.spacing]
    }

    pub fn node_count(&self) -> usize {
        self.side * self.side
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn on_segment(&self, v: usize) -> bool {
        self.seg_pos[v] >= 0
    }

    /// Cost of a step inside the shortcut: the cheap component is scaled by `sqrt(eta)`.
    fn shortcut_cost(&self, step: (i32, i32)) -> f64 {
        let (x, y) = (step.0 as f64 * self.spacing, step.1 as f64 * self.spacing);
        let along = x * self.cheap_dir[0] + y * self.cheap_dir[1];
        let across2 = (x * x + y * y - along * along).max(0.0);
        (self.eta * along * along + across2).sqrt()
    }

    pub fn distance_field(&self, source: usize) -> DistanceField {
        self.dijkstra(source, None)
    }

    fn dijkstra(&self, source: usize, target: Option<usize>) -> DistanceField {
        let side = self.side as i32;
        let total = self.node_count();
        let mut dist = vec![f64::INFINITY; total];
        let mut pred = vec![u32::MAX; total];
        let steps: Vec<(i32, i32, f64)> =
            stencil().into_iter().map(|(a, b)| (a, b, self.spacing * ((a * a + b * b) as f64).sqrt())).collect();
        let seg_cost = self.shortcut_cost(self.seg_step);
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapItem { d: 0.0, v: source });
        while let Some(HeapItem { d, v }) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            if Some(v) == target {
                break;
            }
            let i = (v / self.side) as i32;
            let j = (v % self.side) as i32;
            let mut relax = |u: usize, c: f64, heap: &mut BinaryHeap<HeapItem>| {
                let nd = d + c;
                if nd < dist[u] {
                    dist[u] = nd;
                    pred[u] = v as u32;
                    heap.push(HeapItem { d: nd, v: u });
                }
            };
            for &(a, b, c) in &steps {
                let (ni, nj) = (i + a, j + b);
                if ni >= 0 && nj >= 0 && ni < side && nj < side {
                    relax((ni * side + nj) as usize, c, &mut heap);
                }
            }
            let t = self.seg_pos[v];
            if t >= 0 {
                if t > 0 {
                    relax(self.seg_nodes[t as usize - 1], seg_cost, &mut heap);
                }
                if (t as usize) + 1 < self.seg_nodes.len() {
                    relax(self.seg_nodes[t as usize + 1], seg_cost, &mut heap);
                }
            }
        }
        DistanceField { source, dist, pred }
    }

    /// Node path from the field's source to `target`.
    pub fn path_to(&self, field: &DistanceField, target: usize) -> Vec<usize> {
        let mut path = vec![target];
        let mut v = target;
        while v != field.source {
            let p = field.pred[v];
            if p == u32::MAX {
                return Vec::new();
            }
            v = p as usize;
            path.push(v);
        }
        path.reverse();
        path
    }

    /// Measured distortion of the stencil at `eta = 1`: the largest
    /// `d_grid / |x| - 1` over nodes at distance at least 2 from the corner.
    pub fn grid_slack(&self) -> Result<f64> {
        let flat = self.with_eta(1.0)?;
        let field = flat.distance_field(0);
        let mut worst: f64 = 0.0;
        for v in 0..self.node_count() {
            let x = self.coords(v);
            let e = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if e >= 2.0 {
                worst = worst.max(field.dist[v] / e - 1.0);
            }
        }
        Ok(worst)
    }
}

/// Reduced-plane `d_eta` between the grid nodes nearest to `a` and `b`.
///
/// The search always starts from the lower-indexed node, so the result is
/// exactly symmetric.
pub fn d_eta_reduced(model: &ShortcutModel, a: [f64; 2], b: [f64; 2]) -> Result<f64> {
    let u = model.node(a)?;
    let v = model.node(b)?;
    let (s, t) = if u <= v { (u, v) } else { (v, u) };
    Ok(model.dijkstra(s, Some(t)).dist[t])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RcReport {
    pub eta: f64,
    pub c: f64,
    pub samples: usize,
    pub violations: usize,
    /// Largest `1 - d_eta / |x|` among the samples.
    pub max_deficit: f64,
    pub slack: f64,
    /// Largest `c` for which no node in the disc violates equality.
    pub c_max: f64,
    pub pass: bool,
    pub seed: u64,
}

/// Checks `d_eta(o, x) >= |x| (1 - slack)` on seeded samples of the cone
/// `|theta(x) - pi/4| <= c`, `theta = atan(r1 / r2)`, inside the disc of radius
/// `0.95 extent`. With `c = 0` the samples are diagonal nodes.
pub fn r_c_verify(model: &ShortcutModel, c: f64, samples: usize, seed: u64) -> Result<RcReport> {
    if !(c >= 0.0) {
        return Err(Error::InvalidArgument(format!("c must be nonnegative, got {c}")));
    }
    let slack = model.grid_slack()?;
    let field = model.distance_field(0);
    let quarter = std::f64::consts::FRAC_PI_4;
    let r_max = 0.95 * model.extent;
    let deficit = |v: usize| -> f64 {
        let x = model.coords(v);
        let e = (x[0] * x[0] + x[1] * x[1]).sqrt();
        1.0 - field.dist[v] / e
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut max_deficit = f64::NEG_INFINITY;
    let mut taken = 0;
    let mut attempts = 0;
    while taken < samples && attempts < 100 * samples.max(1) {
        attempts += 1;
        let r = 1.0 + (r_max - 1.0) * rng.random::<f64>();
        let th = quarter + c * (2.0 * rng.random::<f64>() - 1.0);
        let v = model.node([r * th.sin(), r * th.cos()])?;
        let x = model.coords(v);
        if (x[0].atan2(x[1]) - quarter).abs() > c + 1e-12 {
            continue;
        }
        taken += 1;
        let d = deficit(v);
        max_deficit = max_deficit.max(d);
        if d > slack {
            violations += 1;
        }
    }
    let mut c_max = quarter;
    for v in 0..model.node_count() {
        let x = model.coords(v);
        let e = (x[0] * x[0] + x[1] * x[1]).sqrt();
        if (1.0..=r_max).contains(&e) && deficit(v) > slack {
            c_max = c_max.min((x[0].atan2(x[1]) - quarter).abs());
        }
    }
    Ok(RcReport {
        eta: model.eta,
        c,
        samples: taken,
        violations,
        max_deficit,
        slack,
        c_max,
        pass: violations == 0 && taken > 0,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaEntropy {
    pub eta: f64,
    pub slope: f64,
    pub slope_err: f64,
    pub residual: f64,
    pub radii: Vec<f64>,
    pub log_volumes: Vec<f64>,
}

/// Slope of `log V_eta(rho)`, where `V_eta(rho)` sums the cell masses
/// `spacing^2 sinh^{n-1}(r1) sinh^{n-1}(r2)` over nodes with `d_eta(o, x) <= rho`.
pub fn eta_entropy_estimate(model: &ShortcutModel, rho_lo: f64, rho_hi: f64) -> Result<EtaEntropy> {
    if !(rho_hi > rho_lo && rho_lo > 0.0) {
        return Err(Error::InvalidArgument(format!("bad radius range [{rho_lo}, {rho_hi}]")));
    }
    if rho_hi > model.extent {
        return Err(Error::Precondition(format!("radius {rho_hi} exceeds the grid extent {}", model.extent)));
    }
    let field = model.distance_field(0);
    // the ball must not reach the far edges of the grid
    let side = model.side();
    for k in 0..side {
        for v in [(side - 1) * side + k, k * side + side - 1] {
            if field.dist[v] <= rho_hi {
                return Err(Error::Precondition(format!(
                    "the d_eta ball of radius {rho_hi} reaches the grid edge; enlarge the extent"
                )));
            }
        }
    }
    let p = model.n as f64 - 1.0;
    let log_cell = 2.0 * model.spacing.ln();
    let mut masses: Vec<(f64, f64)> = (0..model.node_count())
        .filter(|&v| field.dist[v] <= rho_hi)
        .map(|v| {
            let x = model.coords(v);
            (field.dist[v], log_cell + p * (log_sinh(x[0]) + log_sinh(x[1])))
        })
        .collect();
    masses.sort_by(|a, b| a.0.total_cmp(&b.0));
    let points = 41;
    let radii: Vec<f64> = (0..points).map(|i| rho_lo + (rho_hi - rho_lo) * i as f64 / (points - 1) as f64).collect();
    let mut log_volumes = Vec::with_capacity(points);
    let mut acc = f64::NEG_INFINITY;
    let mut k = 0;
    for &rho in &radii {
        while k < masses.len() && masses[k].0 <= rho {
            acc = log_add(acc, masses[k].1);
            k += 1;
        }
        log_volumes.push(acc);
    }
    let fit = fit_line(&radii, &log_volumes);
    Ok(EtaEntropy {
        eta: model.eta,
        slope: fit.slope,
        slope_err: fit.slope_err,
        residual: fit.residual,
        radii,
        log_volumes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(eta: f64) -> ShortcutModel {
        ShortcutModel::standard(3, eta, 0.05, 6.0).unwrap()
    }

    #[test]
    fn stencil_has_32_primitive_steps() {
        let s = stencil();
        assert_eq!(s.len(), 32);
        assert!((stencil_angular_resolution() - (1.0f64 / 3.0).atan()).abs() < 1e-12);
    }

    #[test]
    fn flat_model_is_euclidean_within_slack() {
        let m = small(1.0);
        let slack = m.grid_slack().unwrap();
        assert!(slack < 0.02, "slack {slack}");
        let d = d_eta_reduced(&m, [0.5, 0.5], [4.5, 3.5]).unwrap();
        let e = (16.0f64 + 9.0).sqrt();
        assert!(d >= e - 1e-12 && d <= e * (1.0 + slack) + 1e-12);
    }

    #[test]
    fn rejects_points_outside_the_grid() {
        let m = small(0.9);
        assert!(matches!(d_eta_reduced(&m, [0.0, 0.0], [6.5, 1.0]), Err(Error::OutOfExtent(..))));
        assert!(ShortcutModel::standard(3, 0.9, 0.1, 6.0).is_err());
        assert!(ShortcutModel::standard(2, 0.9, 0.05, 6.0).is_err());
    }

    #[test]
    fn shortcut_shortens_travel_along_the_segment() {
        let m = small(0.5);
        let d = d_eta_reduced(&m, [1.0, 1.0], [5.0, 1.0]).unwrap();
        assert!((d - 4.0 * 0.5f64.sqrt()).abs() < 1e-9);
    }
}
