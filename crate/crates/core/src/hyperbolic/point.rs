use nalgebra::DVector;

use crate::error::{Error, Result};

/// Lorentzian inner product `q(x, y) = -x0*y0 + sum_{i>=1} xi*yi`.
pub fn minkowski(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let spatial: f64 = a.iter().skip(1).zip(b.iter().skip(1)).map(|(x, y)| x * y).sum();
    spatial - a[0] * b[0]
}

/// A point of real hyperbolic space `H^m`, stored on the upper sheet of the
/// hyperboloid `q(x, x) = -1` in `R^{m+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperboloidPoint {
    coords: DVector<f64>,
}

impl HyperboloidPoint {
    /// Base point `o = (1, 0, ..., 0)` of `H^m`.
    pub fn origin(m: usize) -> Self {
        let mut coords = DVector::zeros(m + 1);
        coords[0] = 1.0;
        Self { coords }
    }

    /// Validates an ambient vector and rescales it onto the hyperboloid.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::InvalidPoint(format!("need m >= 2 (at least 3 coordinates), got {}", coords.len())));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        let v = DVector::from_vec(coords);
        if v[0] <= 0.0 {
            return Err(Error::InvalidPoint("x0 must be positive".into()));
        }
        let q = minkowski(&v, &v);
        if q >= 0.0 {
            return Err(Error::InvalidPoint(format!("vector is not timelike (q = {q})")));
        }
        Ok(Self::renormalized(v / (-q).sqrt()))
    }

    /// Lifts spatial coordinates `s` to `(sqrt(1 + |s|^2), s)`.
    pub fn from_spatial(spatial: &[f64]) -> Self {
        let mut coords = DVector::zeros(spatial.len() + 1);
        coords.rows_mut(1, spatial.len()).copy_from_slice(spatial);
        Self::renormalized(coords)
    }

    /// Recomputes `x0` from the spatial part so that `q(x, x) = -1` holds to rounding.
    pub(crate) fn renormalized(mut coords: DVector<f64>) -> Self {
        let s2: f64 = coords.iter().skip(1).map(|c| c * c).sum();
        coords[0] = (1.0 + s2).sqrt();
        Self { coords }
    }

    /// Dimension `m` of the hyperbolic space.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn spatial(&self) -> Vec<f64> {
        self.coords.iter().skip(1).copied().collect()
    }

    /// The pure boost carrying the origin to this point.
    pub fn boost(&self) -> Boost {
        Boost::to(self)
    }

    /// Tangent vector at this point with the given components in the
    /// orthonormal frame `E_a = L_x (0, e_a)`.
    pub fn tangent_from_frame(&self, components: &[f64]) -> Result<TangentVector> {
        if components.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: components.len() });
        }
        let mut v = DVector::zeros(self.dim() + 1);
        v.rows_mut(1, self.dim()).copy_from_slice(components);
        Ok(TangentVector { base: self.clone(), vec: self.boost().apply(&v) })
    }
}

/// Pure Lorentz boost `L` with `L o = x`.
#[derive(Debug, Clone)]
pub struct Boost {
    x0: f64,
    s: DVector<f64>,
}

impl Boost {
    pub fn to(x: &HyperboloidPoint) -> Self {
        Self { x0: x.coords[0], s: x.coords.rows(1, x.dim()).into_owned() }
    }

    fn apply_signed(&self, v: &DVector<f64>, sign: f64) -> DVector<f64> {
        let m = self.s.len();
        let v0 = v[0];
        let vs = v.rows(1, m);
        // boost with spatial part t = sign * s
        let tv = sign * self.s.dot(&vs);
        let mut out = DVector::zeros(m + 1);
        out[0] = self.x0 * v0 + tv;
        let coef = sign * (v0 + tv / (1.0 + self.x0));
        for i in 0..m {
            out[i + 1] = vs[i] + coef * self.s[i];
        }
        out
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.apply_signed(v, 1.0)
    }

    pub fn apply_inverse(&self, v: &DVector<f64>) -> DVector<f64> {
        self.apply_signed(v, -1.0)
    }

    pub fn apply_point(&self, p: &HyperboloidPoint) -> HyperboloidPoint {
        HyperboloidPoint::renormalized(self.apply(&p.coords))
    }
}

/// Tangent vector `v` at `base`, tangent in the sense `q(base, v) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: HyperboloidPoint,
    vec: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: HyperboloidPoint, vec: Vec<f64>) -> Result<Self> {
        if vec.len() != base.dim() + 1 {
            return Err(Error::DimensionMismatch { expected: base.dim() + 1, got: vec.len() });
        }
        let v = DVector::from_vec(vec);
        let scale = 1.0 + v.amax() * base.coords.amax();
        let q = minkowski(&base.coords, &v);
        if q.abs() > 1e-10 * scale {
            return Err(Error::InvalidPoint(format!("vector not tangent (q(x, v) = {q:e})")));
        }
        Ok(Self { base, vec: v })
    }

    /// Orthogonal projection of an ambient vector onto `T_x H^m`.
    pub fn project(base: &HyperboloidPoint, ambient: &DVector<f64>) -> Self {
        let q = minkowski(&base.coords, ambient);
        Self { base: base.clone(), vec: ambient + base.coords.scale(q) }
    }

    pub fn base(&self) -> &HyperboloidPoint {
        &self.base
    }

    pub fn vec(&self) -> &DVector<f64> {
        &self.vec
    }

    pub fn norm(&self) -> f64 {
        minkowski(&self.vec, &self.vec).max(0.0).sqrt()
    }

    /// Components in the frame `E_a = L_x (0, e_a)` at the base point.
    pub fn frame_components(&self) -> DVector<f64> {
        let local = self.base.boost().apply_inverse(&self.vec);
        local.rows(1, self.base.dim()).into_owned()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { base: self.base.clone(), vec: self.vec.scale(factor) }
    }
}

fn check_dims(x: &HyperboloidPoint, y: &HyperboloidPoint) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    Ok(())
}

/// Hyperbolic distance `arccosh(-q(x, y))`.
///
/// Evaluated as `2 asinh(|x - y|_q / 2)`, which equals the arccosh form but
/// keeps full relative precision for nearby points. Arguments of arccosh in
/// `[1 - 1e-9, 1]` are treated as coincident points.
pub fn dist(x: &HyperboloidPoint, y: &HyperboloidPoint) -> Result<f64> {
    check_dims(x, y)?;
    let a = -minkowski(&x.coords, &y.coords);
    if a < 1.0 - 1e-9 {
        return Err(Error::InvalidPoint(format!("-q(x, y) = {a} < 1; points are not on the hyperboloid")));
    }
    // the chord form avoids cancellation near the diagonal but loses every
    // digit once x0 exceeds 1/ulp; acosh is well conditioned out there
    if a > 2.0 {
        return Ok(a.acosh());
    }
    let diff = &x.coords - &y.coords;
    let chord2 = minkowski(&diff, &diff).max(0.0);
    Ok(2.0 * (chord2.sqrt() / 2.0).asinh())
}

/// Geodesic `t -> cosh(t|v|) x + sinh(t|v|) v/|v|`. A zero vector returns `x`.
pub fn exp_map(x: &HyperboloidPoint, v: &TangentVector, t: f64) -> Result<HyperboloidPoint> {
    check_dims(x, &v.base)?;
    let speed = v.norm();
    if speed == 0.0 || t == 0.0 {
        return Ok(x.clone());
    }
    let s = t * speed;
    let coords = x.coords.scale(s.cosh()) + v.vec.scale(s.sinh() / speed);
    Ok(HyperboloidPoint::renormalized(coords))
}

/// Inverse of [`exp_map`] at `x`: the tangent vector of length `dist(x, y)` pointing at `y`.
pub fn log_map(x: &HyperboloidPoint, y: &HyperboloidPoint) -> Result<TangentVector> {
    let d = dist(x, y)?;
    let u = TangentVector::project(x, &y.coords);
    let n = u.norm();
    if n == 0.0 || d == 0.0 {
        return Ok(u.scaled(0.0));
    }
    Ok(u.scaled(d / n))
}

/// Parallel transport of `v` (tangent at `x`) to `y` along the connecting geodesic.
pub fn parallel_transport(x: &HyperboloidPoint, y: &HyperboloidPoint, v: &TangentVector) -> Result<TangentVector> {
    check_dims(x, y)?;
    let qxy = minkowski(&x.coords, &y.coords);
    let coef = minkowski(&y.coords, &v.vec) / (1.0 - qxy);
    let vec = &v.vec + (&x.coords + &y.coords).scale(coef);
    Ok(TangentVector { base: y.clone(), vec })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(s: &[f64]) -> HyperboloidPoint {
        HyperboloidPoint::from_spatial(s)
    }

    #[test]
    fn origin_to_itself_is_zero() {
        let o = HyperboloidPoint::origin(3);
        assert_eq!(dist(&o, &o).unwrap(), 0.0);
    }

    #[test]
    fn unit_geodesic_point_at_distance_one() {
        let o = HyperboloidPoint::origin(3);
        let y = HyperboloidPoint::new(vec![1f64.cosh(), 1f64.sinh(), 0.0, 0.0]).unwrap();
        assert!((dist(&o, &y).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = dist(&HyperboloidPoint::origin(2), &HyperboloidPoint::origin(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn rejects_spacelike_and_lower_sheet() {
        assert!(HyperboloidPoint::new(vec![0.5, 1.0, 0.0]).is_err());
        assert!(HyperboloidPoint::new(vec![-1.0, 0.0, 0.0]).is_err());
        assert!(HyperboloidPoint::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn new_renormalizes_onto_the_sheet() {
        let p = HyperboloidPoint::new(vec![2.0, 0.3, -0.2, 0.1]).unwrap();
        let q = minkowski(p.coords(), p.coords());
        assert!((q + 1.0).abs() < 1e-12);
    }

    #[test]
    fn boost_inverse_round_trip() {
        let x = pt(&[0.4, -1.2, 2.0]);
        let v = DVector::from_vec(vec![1.3, 0.2, -0.7, 0.5]);
        let b = x.boost();
        let back = b.apply_inverse(&b.apply(&v));
        assert!((back - v).amax() < 1e-12);
        let o = HyperboloidPoint::origin(3);
        assert!((b.apply(o.coords()) - x.coords()).amax() < 1e-12);
    }

    #[test]
    fn frame_is_orthonormal_and_tangent() {
        let x = pt(&[1.0, 0.5, -0.3]);
        for a in 0..3 {
            let mut c = [0.0; 3];
            c[a] = 1.0;
            let ea = x.tangent_from_frame(&c).unwrap();
            assert!(minkowski(x.coords(), ea.vec()).abs() < 1e-12);
            assert!((ea.norm() - 1.0).abs() < 1e-12);
            let comps = ea.frame_components();
            assert!((comps[a] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exp_at_zero_time_is_identity() {
        let x = pt(&[0.2, 0.1, 0.0]);
        let v = x.tangent_from_frame(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(exp_map(&x, &v, 0.0).unwrap(), x);
        let zero = x.tangent_from_frame(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(exp_map(&x, &zero, 3.0).unwrap(), x);
    }

    #[test]
    fn exp_unit_speed_gives_unit_distance() {
        let x = pt(&[0.7, -0.4, 1.1]);
        let v = x.tangent_from_frame(&[0.6, 0.0, 0.8]).unwrap();
        let y = exp_map(&x, &v, 1.0).unwrap();
        assert!((dist(&x, &y).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_inverts_exp() {
        let x = pt(&[0.3, 0.3, -0.5]);
        let y = pt(&[-1.0, 2.0, 0.4]);
        let v = log_map(&x, &y).unwrap();
        let back = exp_map(&x, &v, 1.0).unwrap();
        assert!((back.coords() - y.coords()).amax() < 1e-10);
    }

    #[test]
    fn parallel_transport_is_an_isometry_onto_the_target_tangent_space() {
        let x = pt(&[0.3, 0.3, -0.5]);
        let y = pt(&[-1.0, 2.0, 0.4]);
        let v = x.tangent_from_frame(&[0.2, -1.0, 0.5]).unwrap();
        let w = x.tangent_from_frame(&[1.0, 0.1, 0.3]).unwrap();
        let pv = parallel_transport(&x, &y, &v).unwrap();
        let pw = parallel_transport(&x, &y, &w).unwrap();
        assert!(minkowski(y.coords(), pv.vec()).abs() < 1e-10);
        assert!((minkowski(pv.vec(), pw.vec()) - minkowski(v.vec(), w.vec())).abs() < 1e-10);
        // the geodesic direction is carried to the geodesic direction
        let dir = log_map(&x, &y).unwrap();
        let moved = parallel_transport(&x, &y, &dir).unwrap();
        let back = log_map(&y, &x).unwrap();
        assert!((moved.vec() + back.vec()).amax() < 1e-9);
    }
}
