use nalgebra::{DMatrix, DVector};

use super::point::{minkowski, HyperboloidPoint, TangentVector};
use crate::error::{Error, Result};

/// A point of the visual boundary `S^{m-1}`, represented by a future-pointing
/// null vector. Normalized representatives satisfy `q(o, xi) = -1`, i.e. `xi0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealPoint {
    coords: DVector<f64>,
}

impl IdealPoint {
    /// The normalized ideal point `(1, d/|d|)` in the direction `d`.
    pub fn from_direction(direction: &[f64]) -> Result<Self> {
        let norm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
        if direction.len() < 2 || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidPoint("boundary direction must be a nonzero vector of length >= 2".into()));
        }
        let mut coords = DVector::zeros(direction.len() + 1);
        coords[0] = 1.0;
        for (i, c) in direction.iter().enumerate() {
            coords[i + 1] = c / norm;
        }
        Ok(Self { coords })
    }

    /// Accepts any future-pointing null vector (not necessarily normalized).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let v = DVector::from_vec(coords);
        if v.len() < 3 || v[0] <= 0.0 {
            return Err(Error::InvalidPoint("ideal point needs xi0 > 0 and m >= 2".into()));
        }
        let q = minkowski(&v, &v);
        if q.abs() > 1e-10 * v[0] * v[0] {
            return Err(Error::InvalidPoint(format!("vector is not null (q = {q:e})")));
        }
        Ok(Self { coords: v })
    }

    pub(crate) fn from_null_unchecked(coords: DVector<f64>) -> Self {
        Self { coords }
    }

    /// Rescales so that `q(o, xi) = -1`.
    pub fn normalized(&self) -> Self {
        Self { coords: self.coords.scale(1.0 / self.coords[0]) }
    }

    pub fn is_normalized(&self) -> bool {
        (self.coords[0] - 1.0).abs() <= 1e-10
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    /// Unit direction in `S^{m-1}` seen from the origin.
    pub fn direction(&self) -> Vec<f64> {
        self.coords.iter().skip(1).map(|c| c / self.coords[0]).collect()
    }
}

/// Busemann data at `x` for the boundary point `xi`: value, gradient and
/// Hessian, the latter two also expressed in the frame `E_a = L_x (0, e_a)`.
#[derive(Debug, Clone)]
pub struct Busemann {
    pub value: f64,
    pub gradient: TangentVector,
    /// Gradient components in the orthonormal frame at `x`.
    pub frame_gradient: DVector<f64>,
    /// `Id - dB (x) dB` in the same frame (curvature -1).
    pub hessian: DMatrix<f64>,
}

fn check_pair(x: &HyperboloidPoint, xi: &IdealPoint) -> Result<()> {
    if x.dim() != xi.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: xi.dim() });
    }
    if !xi.is_normalized() {
        return Err(Error::NotNormalized(-xi.coords[0]));
    }
    Ok(())
}

/// `B(x, xi) = log(-q(x, xi))`, normalized so that `B(o, .) = 0` and decreasing
/// along geodesic rays toward `xi`.
pub fn busemann_value(x: &HyperboloidPoint, xi: &IdealPoint) -> Result<f64> {
    check_pair(x, xi)?;
    Ok((-minkowski(x.coords(), &xi.coords)).ln())
}

/// Frame components of `grad B(x, xi)` together with the value, computed from
/// the boundary point expressed in the frame at `x`. This is the hot path used
/// by quadrature sums.
pub(crate) fn busemann_local(x_boost: &super::point::Boost, xi: &DVector<f64>) -> (f64, DVector<f64>) {
    let local = x_boost.apply_inverse(xi);
    let m = local.len() - 1;
    let e0 = local[0];
    let grad = DVector::from_iterator(m, local.iter().skip(1).map(|c| -c / e0));
    (e0.ln(), grad)
}

pub fn busemann(x: &HyperboloidPoint, xi: &IdealPoint) -> Result<Busemann> {
    check_pair(x, xi)?;
    let boost = x.boost();
    let (_, u) = busemann_local(&boost, &xi.coords);
    let value = (-minkowski(x.coords(), &xi.coords)).ln();
    let gradient = x.tangent_from_frame(u.as_slice())?;
    let m = x.dim();
    let hessian = DMatrix::identity(m, m) - &u * u.transpose();
    Ok(Busemann { value, gradient, frame_gradient: u, hessian })
}

/// Density `d nu_x / d nu_o (xi) = exp(-h B(x, xi))` of the visual family.
pub fn visual_density(x: &HyperboloidPoint, xi: &IdealPoint, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("exponent h must be positive, got {h}")));
    }
    Ok((-h * busemann_value(x, xi)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{dist, exp_map};

    #[test]
    fn value_vanishes_at_origin() {
        let o = HyperboloidPoint::origin(3);
        let xi = IdealPoint::from_direction(&[0.3, -0.2, 0.9]).unwrap();
        assert!(busemann(&o, &xi).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn value_along_ray_matches_limit_definition() {
        let o = HyperboloidPoint::origin(3);
        let dir = [0.0, 0.6, 0.8];
        let xi = IdealPoint::from_direction(&dir).unwrap();
        let v = o.tangent_from_frame(&dir).unwrap();
        for s in [0.5, 2.0, 7.0] {
            let x = exp_map(&o, &v, s).unwrap();
            let b = busemann(&x, &xi).unwrap().value;
            assert!((b + s).abs() < 1e-10, "s={s} b={b}");
            // limit definition: d(x, gamma(t)) - t, already constant for t >= s on the ray;
            // t stays moderate so the hyperboloid coordinates keep their precision
            let far = exp_map(&o, &v, 12.0).unwrap();
            let lim = dist(&x, &far).unwrap() - 12.0;
            // the Lorentz form cancels O(e^{2t}) terms, so allow that rounding
            assert!((lim - b).abs() < 1e-7, "lim={lim} b={b}");
        }
    }

    #[test]
    fn unnormalized_ideal_point_is_rejected() {
        let o = HyperboloidPoint::origin(2);
        let xi = IdealPoint::new(vec![2.0, 2.0, 0.0]).unwrap();
        assert!(matches!(busemann(&o, &xi), Err(Error::NotNormalized(_))));
        assert!(busemann(&o, &xi.normalized()).is_ok());
    }

    #[test]
    fn density_is_one_at_origin() {
        let o = HyperboloidPoint::origin(4);
        let xi = IdealPoint::from_direction(&[1.0, 1.0, 0.0, -1.0]).unwrap();
        assert_eq!(visual_density(&o, &xi, 3.0).unwrap(), 1.0);
        assert!(visual_density(&o, &xi, 0.0).is_err());
    }
}
