//! The fixed table of anchor strings. Every report record names the
//! statement it checks by one of these.

pub const ANCHORS: &[(&str, &str)] = &[
    (
        "entropy.profile",
        "minimal-entropy scaling: alpha_i = (h_i/sqrt n_i) prod_j (sqrt n_j/h_j)^(n_j/n), h_min = sqrt n prod_j (h_j/sqrt n_j)^(n_j/n)",
    ),
    ("growth.unscaled", "volume entropy of the unscaled product: sqrt(sum_i h_i^2)"),
    ("growth.scaled", "volume entropy of the scaled product equals h_min"),
    ("growth.closed_form_h3", "ball volume of H^3: pi (sinh 2 rho - 2 rho)"),
    ("barycenter.fixed_point", "the barycenter of a single atom is the atom"),
    ("barycenter.geodesic_midpoint", "two equal atoms in one factor: minimizer on the joining geodesic"),
    ("barycenter.start_independence", "strict convexity: the minimizer does not depend on the start"),
    ("barycenter.trace", "trace H_f = 1 since |dB_0| = 1 in g_min"),
    ("barycenter.k_identity", "real hyperbolic factors: K_i = Id - H_i is the Hessian of the factor functional"),
    ("barycenter.jacobian_bound", "Jacobian bound 2^n (det H)^(1/2) / det K <= (4n / h_min^2)^(n/2)"),
    ("barycenter.symmetric_saturation", "equality in the Jacobian bound iff every H_i = Id / n_i"),
    ("bcg.campaign", "determinant inequality (det H)^(1/2) / det(Id - H) <= (sqrt n / (n - 1))^n"),
    ("bcg.equality", "equality in the determinant inequality at H = Id / n"),
    ("natural_map.equidistant", "natural map components exp(-(c/2) d(x, p_j)), normalized"),
    ("natural_map.energy_bound", "natural map energy sum_j |dP_c(e_j)|^2 <= c^2 / 4"),
    ("shortcut.witness_grid", "a corner of angle alpha can be shortened exactly when cos alpha < eta"),
    ("shortcut.distance_spot_checks", "the shortcut distance is symmetric and at most the Euclidean one"),
    ("shortcut.rc_verify", "near eta = 1 the shortcut metric agrees with the product metric off the shortcut"),
    ("shortcut.entropy_vs_product", "at eta = 1 the model is the product H^n x H^n, of entropy sqrt 2 (n - 1)"),
    ("shortcut.entropy_near_one", "entropy of the shortcut metric is continuous at eta = 1"),
    ("shortcut.entropy_monotone", "entropy of the shortcut metric does not increase with eta"),
    ("shortcut.branching", "for eta < 1 two reflected minimizing paths share a segment of positive length"),
    ("ghnet.net", "a maximal eps-separated set is an eps-net"),
    ("ghnet.edge_intervals", "net graph edge lengths lie in (d - eps/N, d + delta)"),
    ("ghnet.approximation", "the net graph metric is eps-close to the target metric"),
    ("ghnet.gh_consistency", "GH lower bound <= GH upper bound and <= half the identity distortion"),
    ("ghnet.gh_brute_force", "GH distance equals half the least distortion over correspondences"),
    ("ghnet.measure", "Kantorovich duality: transport cost equals the 1-Lipschitz dual"),
];

/// Anchor string for a check name. Panics on names missing from the table,
/// which is a programming error caught by the tests.
pub fn anchor(name: &str) -> &'static str {
    ANCHORS.iter().find(|(n, _)| *n == name).map(|(_, a)| *a).unwrap_or_else(|| panic!("no anchor for check `{name}`"))
}
