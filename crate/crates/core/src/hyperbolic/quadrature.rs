use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::busemann::IdealPoint;
use super::point::HyperboloidPoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "scheme")]
pub enum QuadratureScheme {
    /// Equal angles on `S^1`, hemisphere spiral on `S^2`.
    Deterministic,
    /// Seeded uniform sampling on `S^{m-1}`.
    MonteCarlo { seed: u64 },
}

/// Node set on the visual boundary `S^{m-1}` of `H^m` discretizing the
/// base visual measure `nu_o` (normalized round measure).
///
/// Both schemes place nodes in antipodal pairs, so every odd moment of the
/// node set vanishes exactly.
#[derive(Debug, Clone)]
pub struct BoundaryQuadrature {
    dim: usize,
    nodes: Vec<IdealPoint>,
    weights: Vec<f64>,
    scheme: QuadratureScheme,
}

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653; // pi * (3 - sqrt 5)

/// Uniform weights whose sequential sum is exactly one.
fn uniform_weights(n: usize) -> Vec<f64> {
    let w = 1.0 / n as f64;
    let mut weights = vec![w; n];
    let head: f64 = weights[..n - 1].iter().sum();
    weights[n - 1] = 1.0 - head;
    weights
}

pub fn boundary_quadrature(m: usize, count: usize, scheme: QuadratureScheme) -> Result<BoundaryQuadrature> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("boundary of H^{m} needs m >= 2")));
    }
    if count < 12 {
        return Err(Error::InvalidArgument(format!("quadrature count must be >= 12, got {count}")));
    }
    let half = count.div_ceil(2);
    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(2 * half);
    match scheme {
        QuadratureScheme::Deterministic => match m {
            2 => {
                for k in 0..half {
                    let a = std::f64::consts::PI * (k as f64 + 0.5) / half as f64;
                    dirs.push(vec![a.cos(), a.sin()]);
                }
            }
            3 => {
                for k in 0..half {
                    let z = 1.0 - (k as f64 + 0.5) / half as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = k as f64 * GOLDEN_ANGLE;
                    dirs.push(vec![r * phi.cos(), r * phi.sin(), z]);
                }
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "deterministic quadrature covers S^1 and S^2 only; use monte-carlo for S^{}",
                    m - 1
                )))
            }
        },
        QuadratureScheme::MonteCarlo { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            while dirs.len() < half {
                let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
                let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if n > 1e-12 {
                    dirs.push(v.iter().map(|c| c / n).collect());
                }
            }
        }
    }
    let mut nodes = Vec::with_capacity(2 * half);
    for d in &dirs {
        nodes.push(IdealPoint::from_direction(d)?);
        let neg: Vec<f64> = d.iter().map(|c| -c).collect();
        nodes.push(IdealPoint::from_direction(&neg)?);
    }
    let weights = uniform_weights(nodes.len());
    Ok(BoundaryQuadrature { dim: m, nodes, weights, scheme })
}

impl BoundaryQuadrature {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[IdealPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scheme(&self) -> QuadratureScheme {
        self.scheme
    }

    pub fn seed(&self) -> Option<u64> {
        match self.scheme {
            QuadratureScheme::MonteCarlo { seed } => Some(seed),
            QuadratureScheme::Deterministic => None,
        }
    }

    /// `sum_j w_j f(xi_j)`, the quadrature of `int f d nu_o`.
    pub fn integrate<F: FnMut(&IdealPoint) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(xi, w)| w * f(xi)).sum()
    }

    /// Quadrature of `int f d nu_p` through the density route
    /// `d nu_p = exp(-h B(p, .)) d nu_o`.
    pub fn integrate_weighted<F: FnMut(&IdealPoint) -> f64>(
        &self,
        p: &HyperboloidPoint,
        h: f64,
        mut f: F,
    ) -> Result<f64> {
        let mut acc = 0.0;
        for (xi, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * super::busemann::visual_density(p, xi, h)? * f(xi);
        }
        Ok(acc)
    }

    /// Nodes of `nu_p = (L_p)_* nu_o`, normalized, in the same order as the
    /// base nodes and sharing their weights.
    pub fn pushforward(&self, p: &HyperboloidPoint) -> Result<Vec<IdealPoint>> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        let boost = p.boost();
        Ok(self.nodes.iter().map(|xi| IdealPoint::from_null_unchecked(boost.apply(xi.coords())).normalized()).collect())
    }

    /// Quadrature of `int f d nu_p` through the pushforward route.
    pub fn integrate_pushforward<F: FnMut(&IdealPoint) -> f64>(&self, p: &HyperboloidPoint, mut f: F) -> Result<f64> {
        let pushed = self.pushforward(p)?;
        Ok(pushed.iter().zip(&self.weights).map(|(xi, w)| w * f(xi)).sum())
    }
}
