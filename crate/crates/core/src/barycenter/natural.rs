use nalgebra::DVector;
use serde::Serialize;

use super::solver::BarycenterProblem;
use crate::error::{Error, Result};
use crate::product::{product_dist, ProductPoint, ScalingProfile};

const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaturalMapSample {
    /// Unit vector with entries proportional to `exp(-(c/2) d(x, p_j))`.
    pub components: Vec<f64>,
    /// `sum_a |d P_c(e_a)|^2` by central differences over a `g_min`-orthonormal frame.
    pub energy: f64,
    /// `c^2 / 4`.
    pub bound: f64,
}

fn components_at(points: &[ProductPoint], c: f64, x: &ProductPoint, alphas: &[f64]) -> Result<DVector<f64>> {
    let logs = points.iter().map(|p| product_dist(x, p, alphas).map(|d| -0.5 * c * d)).collect::<Result<Vec<f64>>>()?;
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::Underflow(
            "every component vanished; use a smaller c or move x closer to the points".into(),
        ));
    }
    // shift by the largest exponent so the leading entry is exactly 1 before normalizing
    let v = DVector::from_iterator(logs.len(), logs.iter().map(|l| (l - top).exp()));
    let n = v.norm();
    Ok(v / n)
}

/// The finite natural map `P_c(x)` and its finite-difference energy.
pub fn natural_map_discrete(
    points: &[ProductPoint],
    c: f64,
    x: &ProductPoint,
    profile: &ScalingProfile,
) -> Result<NaturalMapSample> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    if points.len() < 2 {
        return Err(Error::InvalidArgument("natural map needs at least two points".into()));
    }
    x.check_profile(profile)?;
    for p in points {
        p.check_profile(profile)?;
    }
    let center = components_at(points, c, x, &profile.alphas)?;
    let n = profile.total_dim;
    let mut energy = 0.0;
    for a in 0..n {
        let mut e = DVector::zeros(n);
        e[a] = FD_STEP;
        let plus = components_at(points, c, &x.retract(profile, &e)?, &profile.alphas)?;
        let minus = components_at(points, c, &x.retract(profile, &(-e))?, &profile.alphas)?;
        energy += ((plus - minus) / (2.0 * FD_STEP)).norm_squared();
    }
    Ok(NaturalMapSample { components: center.iter().copied().collect(), energy, bound: c * c / 4.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifferentialEstimate {
    /// `d(Bar(f + s u), Bar(f - s u)) / (2 s)`.
    pub norm: f64,
    /// `(4n / h_min^2)^{1/2}`.
    pub bound: f64,
    /// `norm - bound`; positive values are the empirical excess.
    pub slack: f64,
}

impl BarycenterProblem {
    /// Central-difference estimate of `|d Bar (u)|` for a weight-space direction.
    ///
    /// Weights are `w_j = f_j^2` with `f` on the unit sphere; `u` is projected
    /// onto the tangent space at `f` and normalized. A zero projection gives 0.
    pub fn bar_differential_fd(
        &self,
        direction: &[f64],
        step: f64,
        tol: f64,
        max_iter: usize,
    ) -> Result<DifferentialEstimate> {
        let w = self.config().weights();
        if direction.len() != w.len() {
            return Err(Error::DimensionMismatch { expected: w.len(), got: direction.len() });
        }
        if !(step > 0.0 && step <= 1e-3) {
            return Err(Error::Precondition(format!("step must lie in (0, 1e-3], got {step}")));
        }
        let bound = self.profile().differential_bound();
        let f = DVector::from_iterator(w.len(), w.iter().map(|x| x.sqrt()));
        let mut u = DVector::from_column_slice(direction);
        u -= f.scale(u.dot(&f));
        let un = u.norm();
        if un < 1e-14 {
            return Ok(DifferentialEstimate { norm: 0.0, bound, slack: -bound });
        }
        u /= un;
        let side = |sign: f64| -> Result<ProductPoint> {
            let g = &f + u.scale(sign * step);
            let weights: Vec<f64> = g.iter().map(|x| x * x).collect();
            Ok(self.reweighted(weights)?.solve(tol, max_iter)?.point)
        };
        let plus = side(1.0)?;
        let minus = side(-1.0)?;
        let norm = product_dist(&plus, &minus, &self.profile().alphas)? / (2.0 * step);
        Ok(DifferentialEstimate { norm, bound, slack: norm - bound })
    }
}
