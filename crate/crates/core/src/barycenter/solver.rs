use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::config::WeightedConfiguration;
use crate::error::{Error, Result};
use crate::hyperbolic::{Boost, BoundaryQuadrature, HyperboloidPoint};
use crate::product::{product_dist, ProductPoint, ScalingProfile};

/// Largest Newton step, in `g_min` units, tried before halving.
const MAX_STEP: f64 = 2.0;

/// The functional `B_f(x) = sum_j w_j int B_0(x, theta) d nu_{p_j}(theta)`
/// discretized by per-factor boundary quadratures.
///
/// Each `nu_{p_j}` is the product of the factor measures
/// `(L_{p_{j,i}})_* nu_o`, so the base nodes are boosted once per atom and
/// factor when the problem is built.
#[derive(Debug, Clone)]
pub struct BarycenterProblem {
    profile: ScalingProfile,
    config: WeightedConfiguration,
    quad_weights: Vec<Vec<f64>>,
    /// `pushed[j][i]` holds the normalized null vectors of `nu_{p_j}` on factor `i`.
    pushed: Vec<Vec<Vec<DVector<f64>>>>,
    seeds: Vec<Option<u64>>,
}

/// Quadrature sums for one factor at one point.
#[derive(Debug, Clone)]
pub(crate) struct FactorSums {
    /// `sum_j w_j int B_i`.
    pub value: f64,
    /// `sum_j w_j int u`, where `u` is the frame gradient of `B_i`.
    pub mean: DVector<f64>,
    /// `int u` per atom.
    pub atom_means: Vec<DVector<f64>>,
    /// `sum_j w_j int u u^T`.
    pub second: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarycenterSolution {
    #[serde(serialize_with = "serialize_point")]
    pub point: ProductPoint,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub value: f64,
}

fn serialize_point<S: serde::Serializer>(p: &ProductPoint, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&p.to_coords(), s)
}

impl BarycenterProblem {
    pub fn new(profile: &ScalingProfile, config: &WeightedConfiguration, quads: &[BoundaryQuadrature]) -> Result<Self> {
        if quads.len() != profile.k() {
            return Err(Error::ProfileMismatch(format!("{} quadratures for {} factors", quads.len(), profile.k())));
        }
        for (i, q) in quads.iter().enumerate() {
            if q.dim() != profile.dims[i] {
                return Err(Error::ProfileMismatch(format!(
                    "quadrature {i} lives on S^{}, factor is H^{}",
                    q.dim() - 1,
                    profile.dims[i]
                )));
            }
        }
        let mut pushed = Vec::with_capacity(config.len());
        for p in config.points() {
            p.check_profile(profile)?;
            let per_factor = quads
                .iter()
                .enumerate()
                .map(|(i, q)| {
                    q.pushforward(p.factor(i)).map(|nodes| nodes.into_iter().map(|xi| xi.coords().clone()).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            pushed.push(per_factor);
        }
        Ok(Self {
            profile: profile.clone(),
            config: config.clone(),
            quad_weights: quads.iter().map(|q| q.weights().to_vec()).collect(),
            pushed,
            seeds: quads.iter().map(|q| q.seed()).collect(),
        })
    }

    pub fn profile(&self) -> &ScalingProfile {
        &self.profile
    }

    pub fn config(&self) -> &WeightedConfiguration {
        &self.config
    }

    /// Monte Carlo seeds of the factor quadratures (`None` for deterministic ones).
    pub fn seeds(&self) -> &[Option<u64>] {
        &self.seeds
    }

    /// The same atoms and quadratures with new (renormalized) weights.
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<Self> {
        let mut out = self.clone();
        out.config = self.config.with_weights(weights)?;
        Ok(out)
    }

    pub(crate) fn factor_sums(&self, x: &HyperboloidPoint, i: usize, with_second: bool) -> FactorSums {
        let m = self.profile.dims[i];
        let boost: Boost = x.boost();
        let qw = &self.quad_weights[i];
        let mut value = 0.0;
        let mut mean = DVector::zeros(m);
        let mut second = DMatrix::zeros(m, m);
        let mut atom_means = Vec::with_capacity(self.config.len());
        for (j, w) in self.config.weights().iter().enumerate() {
            let mut v = 0.0;
            let mut mu = DVector::zeros(m);
            let mut sec = DMatrix::zeros(m, m);
            for (xi, q) in self.pushed[j][i].iter().zip(qw) {
                let local = boost.apply_inverse(xi);
                let e0 = local[0];
                v += q * e0.ln();
                // u = -local_spatial / e0
                let s = -q / e0;
                for a in 0..m {
                    mu[a] += s * local[a + 1];
                }
                if with_second {
                    let c = q / (e0 * e0);
                    for a in 0..m {
                        let la = local[a + 1] * c;
                        for b in a..m {
                            sec[(a, b)] += la * local[b + 1];
                        }
                    }
                }
            }
            value += w * v;
            mean.axpy(*w, &mu, 1.0);
            if with_second {
                second += sec.scale(*w);
            }
            atom_means.push(mu);
        }
        if with_second {
            for a in 0..m {
                for b in 0..a {
                    second[(a, b)] = second[(b, a)];
                }
            }
        }
        FactorSums { value, mean, atom_means, second }
    }

    /// `B_f(x)` and its gradient in a `g_min`-orthonormal frame at `x`.
    pub fn functional_and_grad(&self, x: &ProductPoint) -> Result<(f64, DVector<f64>)> {
        x.check_profile(&self.profile)?;
        let sk = (self.profile.k() as f64).sqrt();
        let mut value = 0.0;
        let mut grad = DVector::zeros(self.profile.total_dim);
        for i in 0..self.profile.k() {
            let s = self.factor_sums(x.factor(i), i, false);
            value += self.profile.alphas[i] / sk * s.value;
            grad.rows_mut(self.profile.offset(i), self.profile.dims[i]).copy_from(&s.mean.scale(1.0 / sk));
        }
        Ok((value, grad))
    }

    /// Functional value only.
    pub fn value(&self, x: &ProductPoint) -> Result<f64> {
        self.functional_and_grad(x).map(|(v, _)| v)
    }

    /// Gradient and the block-diagonal `K_f` used as the Newton matrix.
    fn newton_data(&self, x: &ProductPoint) -> (f64, DVector<f64>, Vec<DMatrix<f64>>) {
        let sk = (self.profile.k() as f64).sqrt();
        let mut value = 0.0;
        let mut grad = DVector::zeros(self.profile.total_dim);
        let mut blocks = Vec::with_capacity(self.profile.k());
        for i in 0..self.profile.k() {
            let s = self.factor_sums(x.factor(i), i, true);
            let alpha = self.profile.alphas[i];
            let m = self.profile.dims[i];
            value += alpha / sk * s.value;
            grad.rows_mut(self.profile.offset(i), m).copy_from(&s.mean.scale(1.0 / sk));
            blocks.push((DMatrix::identity(m, m) - s.second).scale(1.0 / (alpha * sk)));
        }
        (value, grad, blocks)
    }

    /// Damped Newton iteration started at the heaviest atom.
    pub fn solve(&self, tol: f64, max_iter: usize) -> Result<BarycenterSolution> {
        let start = self.config.points()[self.config.heaviest()].clone();
        self.solve_from(&start, tol, max_iter)
    }

    /// Damped Newton iteration with `K_f` as the Hessian surrogate. Steps are
    /// halved (at most 30 times) until the functional does not increase.
    pub fn solve_from(&self, start: &ProductPoint, tol: f64, max_iter: usize) -> Result<BarycenterSolution> {
        if !(tol >= 1e-10) {
            return Err(Error::Precondition(format!("solver tolerance must be >= 1e-10, got {tol}")));
        }
        start.check_profile(&self.profile)?;
        let mut x = start.clone();
        let (mut value, mut grad, mut blocks) = self.newton_data(&x);
        for it in 0..=max_iter {
            let gn = grad.norm();
            if gn <= tol {
                return Ok(BarycenterSolution { point: x, gradient_norm: gn, iterations: it, value });
            }
            if it == max_iter {
                break;
            }
            let mut step = DVector::zeros(self.profile.total_dim);
            for (i, b) in blocks.iter().enumerate() {
                let off = self.profile.offset(i);
                let m = self.profile.dims[i];
                let g = grad.rows(off, m).into_owned();
                let s = match b.clone().cholesky() {
                    Some(ch) => -ch.solve(&g),
                    None => -g,
                };
                step.rows_mut(off, m).copy_from(&s);
            }
            // Far from the atoms K_f is nearly singular; cap the step before halving.
            let sn = step.norm();
            if sn > MAX_STEP {
                step *= MAX_STEP / sn;
            }
            // Rounding floor for comparing functional values near the optimum.
            let slack = 1e-14 * value.abs().max(1.0);
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..=30 {
                let trial = x.retract(&self.profile, &step.scale(t))?;
                let (v, g, bl) = self.newton_data(&trial);
                if v <= value + slack {
                    accepted = Some((trial, v, g, bl));
                    break;
                }
                t *= 0.5;
            }
            match accepted {
                Some((nx, v, g, bl)) => {
                    x = nx;
                    value = v;
                    grad = g;
                    blocks = bl;
                }
                None => break,
            }
        }
        Err(Error::NonConvergence { iterations: max_iter, gradient_norm: grad.norm(), last_iterate: x.to_coords() })
    }
}

/// `solve_barycenter` for a configuration and per-factor quadratures.
pub fn solve_barycenter(
    profile: &ScalingProfile,
    config: &WeightedConfiguration,
    quads: &[BoundaryQuadrature],
    tol: f64,
    max_iter: usize,
) -> Result<BarycenterSolution> {
    BarycenterProblem::new(profile, config, quads)?.solve(tol, max_iter)
}

/// `functional_and_grad` as a free function.
pub fn functional_and_grad(
    profile: &ScalingProfile,
    config: &WeightedConfiguration,
    x: &ProductPoint,
    quads: &[BoundaryQuadrature],
) -> Result<(f64, DVector<f64>)> {
    BarycenterProblem::new(profile, config, quads)?.functional_and_grad(x)
}

/// Largest pairwise `g_min` distance among solutions, used to compare starts.
pub fn solution_spread(solutions: &[BarycenterSolution], profile: &ScalingProfile) -> Result<f64> {
    let mut spread: f64 = 0.0;
    for a in solutions {
        for b in solutions {
            spread = spread.max(product_dist(&a.point, &b.point, &profile.alphas)?);
        }
    }
    Ok(spread)
}
