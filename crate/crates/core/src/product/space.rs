use nalgebra::{DMatrix, DVector};

use super::profile::ScalingProfile;
use crate::error::{Error, Result};
use crate::hyperbolic::{self, Busemann, HyperboloidPoint, IdealPoint};

/// A point `x = (x_1, ..., x_k)` of a product of hyperbolic factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint {
    factors: Vec<HyperboloidPoint>,
}

impl ProductPoint {
    pub fn new(factors: Vec<HyperboloidPoint>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("product point needs a factor".into()));
        }
        Ok(Self { factors })
    }

    pub fn origin(profile: &ScalingProfile) -> Self {
        Self { factors: profile.dims.iter().map(|&m| HyperboloidPoint::origin(m)).collect() }
    }

    pub fn factors(&self) -> &[HyperboloidPoint] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &HyperboloidPoint {
        &self.factors[i]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim()).collect()
    }

    pub fn check_profile(&self, profile: &ScalingProfile) -> Result<()> {
        if self.dims() != profile.dims {
            return Err(Error::ProfileMismatch(format!(
                "point has factor dims {:?}, profile has {:?}",
                self.dims(),
                profile.dims
            )));
        }
        Ok(())
    }

    /// Moves along `exp` in every factor by the tangent vector whose
    /// components, in a `g_min`-orthonormal frame, are `step`.
    pub fn retract(&self, profile: &ScalingProfile, step: &DVector<f64>) -> Result<Self> {
        self.check_profile(profile)?;
        let mut factors = Vec::with_capacity(self.factors.len());
        for (i, x) in self.factors.iter().enumerate() {
            let off = profile.offset(i);
            let m = profile.dims[i];
            // a g_min-unit vector in factor i has g_i-length 1 / alpha_i
            let comps: Vec<f64> = step.rows(off, m).iter().map(|c| c / profile.alphas[i]).collect();
            let v = x.tangent_from_frame(&comps)?;
            factors.push(hyperbolic::exp_map(x, &v, 1.0)?);
        }
        Ok(Self { factors })
    }

    /// Coordinates of every factor, for reports.
    pub fn to_coords(&self) -> Vec<Vec<f64>> {
        self.factors.iter().map(|f| f.coords().iter().copied().collect()).collect()
    }
}

/// A point `theta = (theta_1, ..., theta_k)` of the Furstenberg boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct FurstenbergPoint {
    factors: Vec<IdealPoint>,
}

impl FurstenbergPoint {
    pub fn new(factors: Vec<IdealPoint>) -> Result<Self> {
        if let Some(i) = factors.iter().position(|f| !f.is_normalized()) {
            return Err(Error::NotNormalized(-factors[i].coords()[0]));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[IdealPoint] {
        &self.factors
    }
}

/// `sqrt(sum_i alpha_i^2 d_i(x_i, y_i)^2)`.
pub fn product_dist(x: &ProductPoint, y: &ProductPoint, scalings: &[f64]) -> Result<f64> {
    if x.factors.len() != y.factors.len() || x.factors.len() != scalings.len() {
        return Err(Error::ProfileMismatch(format!(
            "factor counts {} / {} with {} scalings",
            x.factors.len(),
            y.factors.len(),
            scalings.len()
        )));
    }
    let mut s = 0.0;
    for ((a, b), alpha) in x.factors.iter().zip(&y.factors).zip(scalings) {
        let d = hyperbolic::dist(a, b)?;
        s += (alpha * d).powi(2);
    }
    Ok(s.sqrt())
}

#[derive(Debug, Clone)]
pub struct ProductBusemann {
    pub value: f64,
    /// Gradient in the `g_min`-orthonormal frame (length `n`).
    pub gradient: DVector<f64>,
    /// Block-diagonal Hessian in the same frame.
    pub hessian: DMatrix<f64>,
    pub factors: Vec<Busemann>,
}

/// Busemann function of the product along the equal-weight Weyl direction:
/// `B_0 = sum (alpha_i / sqrt k) B_i`, `grad B_0 = sum (alpha_i sqrt k)^{-1} grad^{g_i} B_i`,
/// `Hess B_0 = (+) (alpha_i sqrt k)^{-1} Hess^{g_i} B_i`.
pub fn product_busemann(
    x: &ProductPoint,
    theta: &FurstenbergPoint,
    profile: &ScalingProfile,
) -> Result<ProductBusemann> {
    x.check_profile(profile)?;
    if theta.factors.len() != profile.k() {
        return Err(Error::ProfileMismatch("boundary point factor count".into()));
    }
    let k = profile.k() as f64;
    let n = profile.total_dim;
    let mut value = 0.0;
    let mut gradient = DVector::zeros(n);
    let mut hessian = DMatrix::zeros(n, n);
    let mut factors = Vec::with_capacity(profile.k());
    for i in 0..profile.k() {
        let b = hyperbolic::busemann(x.factor(i), &theta.factors[i])?;
        let alpha = profile.alphas[i];
        let off = profile.offset(i);
        let m = profile.dims[i];
        value += alpha / k.sqrt() * b.value;
        // g_min-unit frame vector is e_a / alpha_i in g_i units
        gradient.rows_mut(off, m).copy_from(&b.frame_gradient.scale(1.0 / k.sqrt()));
        hessian.view_mut((off, off), (m, m)).copy_from(&b.hessian.scale(1.0 / (alpha * k.sqrt())));
        factors.push(b);
    }
    Ok(ProductBusemann { value, gradient, hessian, factors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h3h3() -> ScalingProfile {
        ScalingProfile::real_hyperbolic(&[3, 3]).unwrap()
    }

    #[test]
    fn pythagorean_combination() {
        let p = h3h3();
        let o = ProductPoint::origin(&p);
        let a = HyperboloidPoint::new(vec![3f64.cosh(), 3f64.sinh(), 0.0, 0.0]).unwrap();
        let b = HyperboloidPoint::new(vec![4f64.cosh(), 0.0, 4f64.sinh(), 0.0]).unwrap();
        let y = ProductPoint::new(vec![a, b]).unwrap();
        assert!((product_dist(&o, &y, &[1.0, 1.0]).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(product_dist(&y, &y, &[1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn single_factor_reduces_to_hyperbolic_distance() {
        let a = HyperboloidPoint::from_spatial(&[0.3, 0.4, -1.0]);
        let b = HyperboloidPoint::from_spatial(&[-0.2, 1.4, 0.0]);
        let x = ProductPoint::new(vec![a.clone()]).unwrap();
        let y = ProductPoint::new(vec![b.clone()]).unwrap();
        let d = hyperbolic::dist(&a, &b).unwrap();
        assert!((product_dist(&x, &y, &[1.0]).unwrap() - d).abs() < 1e-14);
    }

    #[test]
    fn mismatched_scalings_error() {
        let p = h3h3();
        let o = ProductPoint::origin(&p);
        assert!(product_dist(&o, &o, &[1.0]).is_err());
    }

    #[test]
    fn busemann_vanishes_at_base_and_averages_factors() {
        let p = h3h3();
        let o = ProductPoint::origin(&p);
        let th = FurstenbergPoint::new(vec![
            IdealPoint::from_direction(&[1.0, 0.0, 0.0]).unwrap(),
            IdealPoint::from_direction(&[0.0, 1.0, 1.0]).unwrap(),
        ])
        .unwrap();
        assert!(product_busemann(&o, &th, &p).unwrap().value.abs() < 1e-15);

        let x = ProductPoint::new(vec![
            HyperboloidPoint::from_spatial(&[0.5, 0.1, 0.0]),
            HyperboloidPoint::from_spatial(&[-0.3, 0.2, 0.9]),
        ])
        .unwrap();
        let b = product_busemann(&x, &th, &p).unwrap();
        let b1 = hyperbolic::busemann_value(x.factor(0), &th.factors()[0]).unwrap();
        let b2 = hyperbolic::busemann_value(x.factor(1), &th.factors()[1]).unwrap();
        assert!((b.value - (b1 + b2) / 2f64.sqrt()).abs() < 1e-14);
        assert!((b.gradient.norm() - 1.0).abs() < 1e-12);
    }
}
