//! Finite metric spaces: nets, net graphs, Gromov–Hausdorff bounds and
//! comparison of pushed-forward measures.

mod bounds;
mod net;
mod space;
mod transport;

pub use bounds::{epsilon_isometry_check, gh_bounds, Correspondence, GhBounds, IsometryReport, EXACT_GH_LIMIT};
pub use net::{
    approximation_check, build_net_graph, covering_radius, delta_bound, graph_metric, greedy_net, ApproximationReport,
    GraphMetric, NetEdge, NetGraph,
};
pub use space::{CircleMetric, FiniteMetricSpace};
pub use transport::{measure_compare, MeasureDiscrepancy};
