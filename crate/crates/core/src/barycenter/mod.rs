//! Barycenters of finite weighted configurations in a product of real
//! hyperbolic factors, the forms `H_f` and `K_f`, and the determinant and
//! Jacobian inequalities built on them.
//!
//! All tangent quantities are expressed in a `g_min`-orthonormal frame: the
//! frame vector `e` of factor `i` has `g_i`-length `1 / alpha_i`.

mod config;
mod forms;
mod natural;
mod solver;

pub use config::{random_configuration, random_point, WeightedConfiguration};
pub use forms::{
    bcg_campaign, bcg_inequality_check, random_trace_one, BcgCampaign, BcgCheck, FormPair, JacobianReport,
    LipschitzSample,
};
pub use natural::{natural_map_discrete, DifferentialEstimate, NaturalMapSample};
pub use solver::{functional_and_grad, solution_spread, solve_barycenter, BarycenterProblem, BarycenterSolution};
