use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::space::FiniteMetricSpace;
use crate::error::{Error, Result};

/// Scans the points in index order and keeps each one at distance `>= eps`
/// from everything kept so far. The result is `eps`-separated and, being
/// maximal, `eps`-covering.
pub fn greedy_net(x: &FiniteMetricSpace, eps: f64) -> Result<Vec<usize>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let mut net: Vec<usize> = Vec::new();
    for i in 0..x.len() {
        if net.iter().all(|&j| x.d(i, j) >= eps) {
            net.push(i);
        }
    }
    Ok(net)
}

/// Largest distance from a point of `x` to the nearest point of `subset`.
pub fn covering_radius(x: &FiniteMetricSpace, subset: &[usize]) -> f64 {
    (0..x.len()).map(|i| subset.iter().map(|&j| x.d(i, j)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetEdge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// Graph on a net whose edges join vertices with images closer than `eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetGraph {
    /// Net indices in the source space.
    pub vertices: Vec<usize>,
    /// Target index of each vertex.
    pub images: Vec<usize>,
    /// Edges between vertex positions. Lengths are public so that adversarial
    /// inputs can be built; [`approximation_check`] re-validates them.
    pub edges: Vec<NetEdge>,
    pub eps: f64,
    pub delta: f64,
    pub n_count: usize,
}

impl NetGraph {
    /// The open interval `(max{0, d - eps/N}, d + delta)` each edge length must lie in.
    pub fn length_interval(&self, d: f64) -> (f64, f64) {
        ((d - self.eps / self.n_count as f64).max(0.0), d + self.delta)
    }

    /// Positions of edges whose length leaves the mandated interval.
    pub fn interval_violations(&self, target: &FiniteMetricSpace) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                let (lo, hi) = self.length_interval(target.d(self.images[e.a], self.images[e.b]));
                !(e.length > lo && e.length < hi)
            })
            .map(|(k, _)| k)
            .collect()
    }
}

/// Largest admissible `delta`: `min{eps/4, eps^2 / (6 diam)}` (exclusive).
pub fn delta_bound(eps: f64, target: &FiniteMetricSpace) -> f64 {
    let diam = target.diameter();
    if diam > 0.0 {
        (eps / 4.0).min(eps * eps / (6.0 * diam))
    } else {
        eps / 4.0
    }
}

/// Joins net vertices whose images lie closer than `eps` in the target, with
/// edge length equal to the target distance.
///
/// `phi` maps every source index to a target index; `net` lists the source
/// indices that become vertices.
pub fn build_net_graph(
    net: &[usize],
    phi: &[usize],
    target: &FiniteMetricSpace,
    eps: f64,
    delta: f64,
    n_count: usize,
) -> Result<NetGraph> {
    if !(eps > 0.0) || n_count == 0 {
        return Err(Error::InvalidArgument(format!("need eps > 0 and N >= 1, got eps = {eps}, N = {n_count}")));
    }
    let bound = delta_bound(eps, target);
    if !(delta > 0.0 && delta < bound) {
        return Err(Error::Precondition(format!(
            "delta = {delta} must satisfy 0 < delta < min{{eps/4, eps^2/(6 diam)}} = {bound}"
        )));
    }
    let mut images = Vec::with_capacity(net.len());
    for &v in net {
        let &img = phi.get(v).ok_or_else(|| Error::InvalidArgument(format!("phi is not defined at {v}")))?;
        if img >= target.len() {
            return Err(Error::InvalidArgument(format!("phi({v}) = {img} is outside the target")));
        }
        images.push(img);
    }
    let mut edges = Vec::new();
    for a in 0..net.len() {
        for b in a + 1..net.len() {
            let d = target.d(images[a], images[b]);
            if d < eps {
                if d == 0.0 {
                    return Err(Error::Precondition(format!(
                        "net vertices {} and {} have the same image; no positive edge length fits",
                        net[a], net[b]
                    )));
                }
                edges.push(NetEdge { a, b, length: d });
            }
        }
    }
    Ok(NetGraph { vertices: net.to_vec(), images, edges, eps, delta, n_count })
}

/// All-pairs shortest path lengths of a net graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphMetric {
    pub n: usize,
    /// Row-major; unreachable pairs hold `+inf`.
    pub dist: Vec<f64>,
    pub connected: bool,
    pub unreachable_pairs: usize,
}

impl GraphMetric {
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// The metric as a finite metric space; fails for disconnected graphs.
    pub fn to_space(&self) -> Result<FiniteMetricSpace> {
        if !self.connected {
            return Err(Error::Precondition(format!(
                "net graph is disconnected ({} unreachable ordered pairs)",
                self.unreachable_pairs
            )));
        }
        FiniteMetricSpace::from_metric(self.n, |i, j| self.d(i, j))
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from every vertex.
pub fn graph_metric(g: &NetGraph) -> GraphMetric {
    let n = g.vertices.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in &g.edges {
        adj[e.a].push((e.b, e.length));
        adj[e.b].push((e.a, e.length));
    }
    let mut dist = vec![f64::INFINITY; n * n];
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0.0;
        let mut heap = BinaryHeap::from([Item(0.0, s)]);
        while let Some(Item(d, v)) = heap.pop() {
            if d > row[v] {
                continue;
            }
            for &(u, w) in &adj[v] {
                if d + w < row[u] {
                    row[u] = d + w;
                    heap.push(Item(d + w, u));
                }
            }
        }
    }
    let unreachable_pairs = dist.iter().filter(|d| d.is_infinite()).count();
    GraphMetric { n, dist, connected: unreachable_pairs == 0, unreachable_pairs }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximationReport {
    pub eps: f64,
    /// `max (d_G - d_target)`; Step 1 asks for `<= eps`.
    pub upper_excess: f64,
    /// `max (d_target - d_G)`; Step 2 asks for `<= eps`.
    pub lower_excess: f64,
    pub max_deviation: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub interval_violations: usize,
    pub connected: bool,
    pub pass: bool,
}

/// Compares the graph metric with target distances of the images over all
/// vertex pairs. Passing also requires every edge length to sit in its
/// interval and the graph to be connected.
pub fn approximation_check(g: &NetGraph, target: &FiniteMetricSpace, eps: f64) -> ApproximationReport {
    let gm = graph_metric(g);
    let n = gm.n;
    let mut upper: f64 = 0.0;
    let mut lower: f64 = 0.0;
    let mut worst = None;
    let mut max_dev: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let diff = gm.d(i, j) - target.d(g.images[i], g.images[j]);
            upper = upper.max(diff);
            lower = lower.max(-diff);
            if diff.abs() > max_dev || (diff.is_nan() && worst.is_none()) {
                max_dev = diff.abs();
                worst = Some((g.vertices[i], g.vertices[j]));
            }
        }
    }
    let interval_violations = g.interval_violations(target).len();
    ApproximationReport {
        eps,
        upper_excess: upper,
        lower_excess: lower,
        max_deviation: max_dev,
        worst_pair: worst,
        interval_violations,
        connected: gm.connected,
        pass: gm.connected && interval_violations == 0 && max_dev <= eps,
    }
}
