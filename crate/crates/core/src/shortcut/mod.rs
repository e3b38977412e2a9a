//! The shortcut metric `d_eta` in the reduced `(r1, r2)`-plane.
//!
//! Geodesics of the product that keep their angular coordinates fixed live in
//! a flat quarter-plane with coordinates `r1 = d(o1, x1)`, `r2 = d(o2, x2)`.
//! The shortcut set is a segment of that plane along which the first-factor
//! component of motion is cheaper by `sqrt(eta)`.

mod corner;
mod lemma;
mod model;

pub use corner::{branching_geodesic_demo, extract_corner_path, BranchingReport, CornerPath, HorizontalShortcut};
pub use lemma::{corner_ratio, shorter_path_witness, turning_angle_threshold, PathWitness};
pub use model::{
    d_eta_reduced, eta_entropy_estimate, r_c_verify, stencil, stencil_angular_resolution, DistanceField, EtaEntropy,
    RcReport, ShortcutModel, ShortcutSegment,
};
