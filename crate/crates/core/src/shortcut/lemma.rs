use serde::Serialize;

use crate::error::{Error, Result};

/// Largest corner angle a `d_eta`-minimizing path can make: `arccos(eta)`.
pub fn turning_angle_threshold(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("eta must lie in (0, 1), got {eta}")));
    }
    Ok(eta.acos())
}

/// A concrete pair `P` on the incoming line and `Q` on the outgoing line
/// with `|PQ| < |PA| + eta |AQ|`, the corner `A` sitting at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathWitness {
    /// The angle `APQ`.
    pub theta: f64,
    pub p: [f64; 2],
    pub q: [f64; 2],
    /// `|PA| + eta |AQ| - |PQ|`, computed from the coordinates.
    pub savings: f64,
}

/// `sin(alpha) (1 - cos theta) / sin theta + cos alpha`, written with the
/// half-angle tangent to stay accurate for small `theta`.
pub fn corner_ratio(alpha: f64, theta: f64) -> f64 {
    alpha.sin() * (0.5 * theta).tan() + alpha.cos()
}

/// Looks for a shortcut across a corner of turning angle `alpha` when the
/// second leg costs `eta` per unit length. A witness exists exactly when
/// `cos(alpha) < eta`.
pub fn shorter_path_witness(eta: f64, alpha: f64) -> Result<Option<PathWitness>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidArgument(format!("eta must lie in (0, 1], got {eta}")));
    }
    if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_2) {
        return Ok(None);
    }
    let (sa, ca) = alpha.sin_cos();
    if ca >= eta {
        return Ok(None);
    }
    // tan(theta) = (eta - cos a) / sin a < tan(a / 2), so theta < a / 2, and
    // corner_ratio(theta) < cos a + sin a tan(theta) = eta.
    let theta = ((eta - ca) / sa).atan();
    let denom = (alpha - theta).sin();
    let aq = theta.sin() / denom;
    let p = [-1.0, 0.0];
    let q = [aq * ca, aq * sa];
    let pa = 1.0;
    let pq = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
    let savings = pa + eta * aq - pq;
    if savings <= 0.0 {
        // only reachable when rounding swamps a vanishing margin
        return Ok(None);
    }
    Ok(Some(PathWitness { theta, p, q, savings }))
}
