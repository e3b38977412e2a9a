//! Products of real hyperbolic factors with the minimal-entropy scaling.

mod growth;
mod profile;
mod space;

pub use growth::{entropy_growth_numeric, entropy_growth_scaled, entropy_growth_seeded, GrowthEstimate, GrowthMethod};
pub use profile::{min_entropy_profile, min_entropy_profile_forced, ScalingProfile};
pub use space::{product_busemann, product_dist, FurstenbergPoint, ProductBusemann, ProductPoint};
