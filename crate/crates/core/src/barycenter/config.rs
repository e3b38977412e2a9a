use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hyperbolic::{exp_map, HyperboloidPoint};
use crate::product::{ProductPoint, ScalingProfile};

/// Finitely supported `f^2`: atoms `(w_j, p_j)` with `sum w_j = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedConfiguration {
    weights: Vec<f64>,
    points: Vec<ProductPoint>,
}

impl WeightedConfiguration {
    /// Weights must already sum to one within `1e-12`.
    pub fn new(weights: Vec<f64>, points: Vec<ProductPoint>) -> Result<Self> {
        Self::check(&weights, &points)?;
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {s}, not 1")));
        }
        Ok(Self { weights, points })
    }

    /// Rescales positive weights to sum to one.
    pub fn normalized(weights: Vec<f64>, points: Vec<ProductPoint>) -> Result<Self> {
        Self::check(&weights, &points)?;
        let s: f64 = weights.iter().sum();
        Ok(Self { weights: weights.iter().map(|w| w / s).collect(), points })
    }

    pub fn single(point: ProductPoint) -> Self {
        Self { weights: vec![1.0], points: vec![point] }
    }

    fn check(weights: &[f64], points: &[ProductPoint]) -> Result<()> {
        if weights.is_empty() || weights.len() != points.len() {
            return Err(Error::InvalidArgument(format!("{} weights for {} points", weights.len(), points.len())));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(format!("weights must be positive, got {w}")));
        }
        let dims = points[0].dims();
        if points.iter().any(|p| p.dims() != dims) {
            return Err(Error::ProfileMismatch("atoms live in different products".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn points(&self) -> &[ProductPoint] {
        &self.points
    }

    /// Index of the heaviest atom (first one on ties).
    pub fn heaviest(&self) -> usize {
        let mut best = 0;
        for (j, w) in self.weights.iter().enumerate() {
            if *w > self.weights[best] {
                best = j;
            }
        }
        best
    }

    /// Same atoms with new weights (renormalized).
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::normalized(weights, self.points.clone())
    }
}

/// Uniformly random direction in `R^m` scaled to a hyperbolic distance drawn
/// uniformly from `[0, radius]`, expressed as a point of `H^m`.
pub fn random_point<R: Rng>(m: usize, radius: f64, rng: &mut R) -> HyperboloidPoint {
    let o = HyperboloidPoint::origin(m);
    let dir: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
    let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-300);
    let unit: Vec<f64> = dir.iter().map(|c| c / norm).collect();
    let v = o.tangent_from_frame(&unit).expect("frame components have the point's dimension");
    let r = rng.random::<f64>() * radius;
    exp_map(&o, &v, r).expect("same dimension")
}

/// Seeded random configuration: `atoms` points with every factor within
/// `radius` of the base point, weights uniform in `[0.2, 1]` then normalized.
pub fn random_configuration(
    profile: &ScalingProfile,
    atoms: usize,
    radius: f64,
    seed: u64,
) -> Result<WeightedConfiguration> {
    if atoms == 0 {
        return Err(Error::InvalidArgument("need at least one atom".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(atoms);
    let mut weights = Vec::with_capacity(atoms);
    for _ in 0..atoms {
        let factors = profile.dims.iter().map(|&m| random_point(m, radius, &mut rng)).collect();
        points.push(ProductPoint::new(factors)?);
        weights.push(0.2 + 0.8 * rng.random::<f64>());
    }
    WeightedConfiguration::normalized(weights, points)
}
