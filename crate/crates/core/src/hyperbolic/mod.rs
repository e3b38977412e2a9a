//! Real hyperbolic space `H^m` in the hyperboloid model.
//!
//! Points live on the upper sheet `q(x, x) = -1` of the Minkowski form
//! `q(x, y) = -x0 y0 + sum x_i y_i`; boundary points are normalized null
//! vectors with `x0 = 1`. Tangent data is reported in the frame
//! `E_a = L_x (0, e_a)`, where `L_x` is the pure boost taking the origin to `x`.

mod busemann;
mod point;
mod quadrature;

pub use busemann::{busemann, busemann_value, visual_density, Busemann, IdealPoint};
pub use point::{dist, exp_map, log_map, minkowski, parallel_transport, Boost, HyperboloidPoint, TangentVector};
pub use quadrature::{boundary_quadrature, BoundaryQuadrature, QuadratureScheme};
