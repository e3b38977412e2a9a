use serde::Serialize;

use super::model::{DistanceField, ShortcutModel};
use crate::error::{Error, Result};

/// A polyline in the quarter-plane whose segments carry cost multipliers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerPath {
    pub vertices: Vec<[f64; 2]>,
    pub multipliers: Vec<f64>,
    pub length: f64,
    /// Angle between consecutive segment directions at each interior vertex.
    pub turning_angles: Vec<f64>,
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

impl CornerPath {
    pub fn new(vertices: Vec<[f64; 2]>, multipliers: Vec<f64>) -> Result<Self> {
        if vertices.len() < 2 || multipliers.len() + 1 != vertices.len() {
            return Err(Error::InvalidArgument(format!(
                "{} vertices need {} multipliers, got {}",
                vertices.len(),
                vertices.len().saturating_sub(1),
                multipliers.len()
            )));
        }
        let length = vertices.windows(2).zip(&multipliers).map(|(w, m)| m * norm(sub(w[1], w[0]))).sum();
        let turning_angles = vertices
            .windows(3)
            .map(|w| {
                let (u, v) = (sub(w[1], w[0]), sub(w[2], w[1]));
                let cross = u[0] * v[1] - u[1] * v[0];
                let dot = u[0] * v[0] + u[1] * v[1];
                cross.abs().atan2(dot)
            })
            .collect();
        Ok(Self { vertices, multipliers, length, turning_angles })
    }
}

/// Extracts the minimizing grid path to `target` as a corner path, merging
/// consecutive steps that share a direction and a multiplier.
pub fn extract_corner_path(model: &ShortcutModel, field: &DistanceField, target: usize) -> Result<CornerPath> {
    let nodes = model.path_to(field, target);
    if nodes.is_empty() {
        return Err(Error::InvalidArgument("target is unreachable".into()));
    }
    if nodes.len() == 1 {
        let p = model.coords(nodes[0]);
        return CornerPath::new(vec![p, p], vec![1.0]);
    }
    let side = model.side() as i64;
    let step = |a: usize, b: usize| {
        let (ai, aj) = (a as i64 / side, a as i64 % side);
        let (bi, bj) = (b as i64 / side, b as i64 % side);
        (bi - ai, bj - aj)
    };
    let mult = |a: usize, b: usize| {
        let (s, t) = (model.coords(a), model.coords(b));
        let euclid = norm(sub(t, s));
        let d = field.dist[b] - field.dist[a];
        // shortcut edges are the only ones cheaper than their length
        if d < euclid * (1.0 - 1e-12) {
            model.eta.sqrt()
        } else {
            1.0
        }
    };
    let mut vertices = vec![model.coords(nodes[0])];
    let mut multipliers = Vec::new();
    let mut last: Option<((i64, i64), f64)> = None;
    for w in nodes.windows(2) {
        let s = step(w[0], w[1]);
        let m = mult(w[0], w[1]);
        let here = model.coords(w[1]);
        match last {
            Some((ls, lm)) if ls == s && lm == m => {
                *vertices.last_mut().expect("nonempty") = here;
            }
            _ => {
                vertices.push(here);
                multipliers.push(m);
            }
        }
        last = Some((s, m));
    }
    CornerPath::new(vertices, multipliers)
}

/// Continuous model of a straight shortcut segment: the line `r2 = level`
/// for `r1` in `[lo, hi]`, costing `sqrt(eta)` per unit length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizontalShortcut {
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
    pub eta: f64,
}

impl HorizontalShortcut {
    pub fn from_model(model: &ShortcutModel) -> Result<Self> {
        let s = model.segment;
        if (s.start[1] - s.end[1]).abs() > 1e-12 || model.cheap_dir != [1.0, 0.0] {
            return Err(Error::InvalidArgument("branching demo needs a segment along the cheap r1 direction".into()));
        }
        Ok(Self { level: s.start[1], lo: s.start[0].min(s.end[0]), hi: s.start[0].max(s.end[0]), eta: model.eta })
    }

    /// Reflection across the line carrying the segment.
    pub fn reflect(&self, p: [f64; 2]) -> [f64; 2] {
        [p[0], 2.0 * self.level - p[1]]
    }

    /// Best path from `p` to `q` that is either straight or enters the
    /// segment once and leaves it once.
    pub fn optimal_path(&self, p: [f64; 2], q: [f64; 2]) -> Result<CornerPath> {
        let root_eta = self.eta.sqrt();
        let level = self.level;
        let cost = |a: f64, b: f64| norm(sub([a, level], p)) + root_eta * (b - a).abs() + norm(sub(q, [b, level]));
        // cost is jointly convex, so the inner minimum is convex in the entry point
        let inner = |a: f64| golden(|b| cost(a, b), self.lo, self.hi);
        let a = golden(|a| cost(a, inner(a)), self.lo, self.hi);
        let b = inner(a);
        let via = CornerPath::new(vec![p, [a, level], [b, level], q], vec![1.0, root_eta, 1.0])?;
        let direct = CornerPath::new(vec![p, q], vec![1.0])?;
        Ok(if via.length < direct.length && (b - a).abs() > 0.0 { via } else { direct })
    }
}

fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-13 * (1.0 + hi.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchingReport {
    pub eta: f64,
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub p_hat: [f64; 2],
    pub q_hat: [f64; 2],
    pub path: CornerPath,
    pub reflected: CornerPath,
    pub length_gap: f64,
    /// Length of the part of the segment both minimizers traverse.
    pub shared_length: f64,
    /// False when the shortcut is not used and nothing branches.
    pub conclusive: bool,
}

/// Minimizers from `p` to `q` and between their mirror images across the
/// shortcut line. When the shortcut is used, both run along the same piece
/// of it: two distinct minimizers share a segment and then split, which a
/// smooth Riemannian metric cannot produce.
pub fn branching_geodesic_demo(model: &ShortcutModel, p: [f64; 2], q: [f64; 2]) -> Result<BranchingReport> {
    let seg = HorizontalShortcut::from_model(model)?;
    let p_hat = seg.reflect(p);
    let q_hat = seg.reflect(q);
    let path = seg.optimal_path(p, q)?;
    let reflected = seg.optimal_path(p_hat, q_hat)?;
    let span = |c: &CornerPath| -> Option<(f64, f64)> {
        if c.vertices.len() == 4 {
            let (a, b) = (c.vertices[1][0], c.vertices[2][0]);
            Some((a.min(b), a.max(b)))
        } else {
            None
        }
    };
    let shared_length = match (span(&path), span(&reflected)) {
        (Some(x), Some(y)) => (x.1.min(y.1) - x.0.max(y.0)).max(0.0),
        _ => 0.0,
    };
    Ok(BranchingReport {
        eta: model.eta,
        p,
        q,
        p_hat,
        q_hat,
        length_gap: (path.length - reflected.length).abs(),
        conclusive: shared_length > 0.0 && p != p_hat,
        path,
        reflected,
        shared_length,
    })
}
