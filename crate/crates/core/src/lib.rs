//! Numerical laboratory for minimal volume entropy on products of real
//! hyperbolic spaces.
//!
//! - [`hyperbolic`]: hyperboloid-model primitives, Busemann data, visual densities
//!   and boundary quadrature.
//! - [`product`]: the minimal-entropy scaling profile, product distances and
//!   Busemann functions, entropy by volume growth.
//! - [`barycenter`]: the barycenter of a weighted configuration, the forms `H_f`
//!   and `K_f`, the Jacobian and determinant inequalities, natural maps.
//! - [`shortcut`]: the reduced-plane shortcut metric and its entropy sweep.
//! - [`gh`]: finite metric spaces, nets, net graphs and Gromov–Hausdorff tooling.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the out-of-range values.
// Index loops fill symmetric matrices, where iterators obscure the (i, j) pairing.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod barycenter;
pub mod error;
pub mod gh;
pub mod hyperbolic;
pub mod product;
pub mod shortcut;
pub(crate) mod stats;

pub use error::{Error, Result};
