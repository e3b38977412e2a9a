use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

const TRIANGLE_TOL: f64 = 1e-9;

/// A finite metric space with a probability measure on its points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    weights: Vec<f64>,
}

/// Which metric a circle sample carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircleMetric {
    Chord,
    Arc,
}

impl FiniteMetricSpace {
    /// Validates the distance matrix (zero diagonal, symmetry, triangle
    /// inequality within 1e-9) and the weights (uniform when `None`).
    pub fn new(rows: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty metric space".into()));
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidArgument(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            dist.extend_from_slice(row);
        }
        let space = Self::from_flat(n, dist, weights)?;
        space.check_triangle()?;
        Ok(space)
    }

    /// Builds a space from a distance function that is already known to be a
    /// metric (a restriction of a metric), so the cubic triangle scan is skipped.
    pub fn from_metric(n: usize, d: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = d(i, j);
                dist[i * n + j] = v;
                dist[j * n + i] = v;
            }
        }
        Self::from_flat(n, dist, None)
    }

    fn from_flat(n: usize, dist: Vec<f64>, weights: Option<Vec<f64>>) -> Result<Self> {
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("d({i}, {i}) = {} is not zero", dist[i * n + i])));
            }
            for j in 0..i {
                let (a, b) = (dist[i * n + j], dist[j * n + i]);
                if !(a.is_finite() && a >= 0.0) || (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                    return Err(Error::InvalidArgument(format!("d({i}, {j}) = {a} but d({j}, {i}) = {b}")));
                }
            }
        }
        let weights = match weights {
            None => vec![1.0 / n as f64; n],
            Some(w) => {
                if w.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: w.len() });
                }
                let s: f64 = w.iter().sum();
                if w.iter().any(|x| !(*x >= 0.0)) || (s - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!("weights must be a probability vector (sum {s})")));
                }
                w
            }
        };
        Ok(Self { n, dist, weights })
    }

    pub fn check_triangle(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let dij = self.d(i, j);
                for k in 0..n {
                    if dij > self.d(i, k) + self.d(k, j) + TRIANGLE_TOL {
                        return Err(Error::InvalidArgument(format!(
                            "triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::from_flat(self.n, self.dist.clone(), Some(weights))
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    /// `max_j d(i, j)` for every `i`.
    pub fn eccentricities(&self) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.d(i, j)).fold(0.0, f64::max)).collect()
    }

    /// The metric restricted to `indices`, with the weights renormalized
    /// (uniform if the restriction carries no mass).
    pub fn subspace(&self, indices: &[usize]) -> Result<Self> {
        let m = indices.len();
        let mut dist = vec![0.0; m * m];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                dist[a * m + b] = self.d(i, j);
            }
        }
        let mass: f64 = indices.iter().map(|&i| self.weights[i]).sum();
        let weights = (mass > 0.0).then(|| indices.iter().map(|&i| self.weights[i] / mass).collect());
        Self::from_flat(m, dist, weights)
    }

    /// `n` equally spaced points on the unit circle.
    pub fn circle(n: usize, metric: CircleMetric) -> Result<Self> {
        Self::from_metric(n, |i, j| {
            let gap = (i as f64 - j as f64).abs() * TAU / n as f64;
            let arc = gap.min(TAU - gap);
            match metric {
                CircleMetric::Arc => arc,
                CircleMetric::Chord => 2.0 * (0.5 * arc).sin(),
            }
        })
    }

    /// The `k x k` grid on the flat unit torus with its geodesic metric.
    pub fn flat_torus(k: usize) -> Result<Self> {
        let wrap = |a: usize, b: usize| {
            let t = (a as f64 - b as f64).abs() / k as f64;
            t.min(1.0 - t)
        };
        Self::from_metric(k * k, |i, j| wrap(i / k, j / k).hypot(wrap(i % k, j % k)))
    }

    /// Vertices of a random recursive tree with edge lengths uniform in
    /// `(0, max_edge]`, under the path metric.
    pub fn random_tree(n: usize, max_edge: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut depth_path: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
        for v in 1..n {
            let parent = rng.random_range(0..v);
            let len = max_edge * (1.0 - rng.random::<f64>());
            for u in 0..v {
                let d = depth_path[parent][u] + len;
                depth_path[v][u] = d;
                depth_path[u][v] = d;
            }
        }
        Self::from_metric(n, |i, j| depth_path[i][j])
    }

    /// Parses the text format: a line holding `N`, then `N` rows of `N`
    /// comma-separated distances, then optionally one row of `N` weights.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        for (k, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            let line = record.position().map_or(k + 1, |p| p.line() as usize);
            if record.iter().all(str::is_empty) {
                continue;
            }
            let values = record
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("line {line}: {f:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push((line, values));
        }
        let Some((line, head)) = rows.first() else {
            return Err(Error::Parse("empty input".into()));
        };
        if head.len() != 1 || head[0] < 1.0 || head[0].fract() != 0.0 {
            return Err(Error::Parse(format!("line {line}: expected the point count N")));
        }
        let n = head[0] as usize;
        let body = &rows[1..];
        if body.len() != n && body.len() != n + 1 {
            return Err(Error::Parse(format!(
                "expected {n} distance rows and an optional weight row, got {} rows",
                body.len()
            )));
        }
        for (line, r) in body {
            if r.len() != n {
                return Err(Error::Parse(format!("line {line}: expected {n} values, got {}", r.len())));
            }
        }
        let matrix = body[..n].iter().map(|(_, r)| r.clone()).collect();
        let weights = body.get(n).map(|(_, r)| r.clone());
        Self::new(matrix, weights)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", self.n);
        let row = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        for i in 0..self.n {
            out.push_str(&row(&self.dist[i * self.n..(i + 1) * self.n]));
            out.push('\n');
        }
        out.push_str(&row(&self.weights));
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let x = FiniteMetricSpace::random_tree(6, 1.0, 3).unwrap();
        let y = FiniteMetricSpace::from_csv(&x.to_csv()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn csv_without_weights_is_uniform() {
        let x = FiniteMetricSpace::from_csv("2\n0, 1.5\n1.5, 0\n").unwrap();
        assert_eq!(x.weights(), &[0.5, 0.5]);
        assert_eq!(x.d(0, 1), 1.5);
    }

    #[test]
    fn rejects_broken_inputs() {
        assert!(FiniteMetricSpace::from_csv("").is_err());
        assert!(FiniteMetricSpace::from_csv("2\n0,1\n2,0\n").is_err());
        assert!(FiniteMetricSpace::from_csv("2\n0,1\n1,0\n0.3,0.3\n").is_err());
        assert!(FiniteMetricSpace::from_csv("2\n0,x\n1,0\n").is_err());
        let bad = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        assert!(FiniteMetricSpace::new(bad, None).is_err());
    }

    #[test]
    fn samples_are_metrics() {
        FiniteMetricSpace::circle(30, CircleMetric::Chord).unwrap().check_triangle().unwrap();
        FiniteMetricSpace::circle(30, CircleMetric::Arc).unwrap().check_triangle().unwrap();
        FiniteMetricSpace::flat_torus(5).unwrap().check_triangle().unwrap();
        FiniteMetricSpace::random_tree(20, 0.5, 1).unwrap().check_triangle().unwrap();
    }
}
