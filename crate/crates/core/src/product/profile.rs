use serde::Serialize;

use crate::error::{Error, Result};

/// The minimal-entropy scaling data of a product `X_1 x ... x X_k`.
///
/// `g_min = alpha_1^2 g_1 x ... x alpha_k^2 g_k` with
/// `alpha_i = (h_i / sqrt n_i) prod_j (sqrt n_j / h_j)^{n_j/n}` and
/// `h(g_min) = sqrt n prod_j (h_j / sqrt n_j)^{n_j/n}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingProfile {
    pub dims: Vec<usize>,
    pub entropies: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `n = sum n_i`.
    pub total_dim: usize,
    /// `h(g_min)`.
    pub h_min: f64,
    /// `h(g_min)^2 / (4n)`, the scale of the normalized metric `g_m`.
    pub gm_factor: f64,
    /// False when built with [`min_entropy_profile_forced`] outside `n_i >= 3`.
    pub within_hypotheses: bool,
}

impl ScalingProfile {
    pub fn k(&self) -> usize {
        self.dims.len()
    }

    /// Profile of a product of real hyperbolic factors (`h_i = n_i - 1`).
    pub fn real_hyperbolic(dims: &[usize]) -> Result<Self> {
        let entropies: Vec<f64> = dims.iter().map(|&n| n as f64 - 1.0).collect();
        min_entropy_profile(dims, &entropies)
    }

    /// Offset of factor `i` inside the `n`-dimensional tangent space.
    pub fn offset(&self, i: usize) -> usize {
        self.dims[..i].iter().sum()
    }

    /// `(4n / h_min^2)^{n/2}`, the Jacobian bound of the barycenter map.
    pub fn jacobian_bound(&self) -> f64 {
        let n = self.total_dim as f64;
        (4.0 * n / (self.h_min * self.h_min)).powf(n / 2.0)
    }

    /// `(4n / h_min^2)^{1/2}`, the matching bound for directional derivatives.
    pub fn differential_bound(&self) -> f64 {
        (4.0 * self.total_dim as f64).sqrt() / self.h_min
    }

    /// `sum_i (h_i / alpha_i)^2`; equals `h_min^2` identically.
    pub fn entropy_norm_sq(&self) -> f64 {
        self.entropies.iter().zip(&self.alphas).map(|(h, a)| (h / a).powi(2)).sum()
    }

    /// `sum_i n_i (h_i / alpha_i)^2 / (n h_min^2)`. Reported as a diagnostic;
    /// it equals `sum n_i^2 / n^2`, which is 1 only for a single factor.
    pub fn weighted_entropy_ratio(&self) -> f64 {
        let s: f64 = self
            .dims
            .iter()
            .zip(&self.entropies)
            .zip(&self.alphas)
            .map(|((&n, h), a)| n as f64 * (h / a).powi(2))
            .sum();
        s / (self.total_dim as f64 * self.h_min * self.h_min)
    }
}

fn build(dims: &[usize], entropies: &[f64], forced: bool) -> Result<ScalingProfile> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("profile needs at least one factor".into()));
    }
    if dims.len() != entropies.len() {
        return Err(Error::InvalidArgument(format!("{} dimensions but {} entropies", dims.len(), entropies.len())));
    }
    if let Some(h) = entropies.iter().find(|h| !(**h > 0.0) || !h.is_finite()) {
        return Err(Error::InvalidArgument(format!("entropies must be positive, got {h}")));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidArgument("factor dimensions must be positive".into()));
    }
    let small = dims.iter().any(|&n| n < 3);
    if small && !forced {
        return Err(Error::HypothesisViolation(format!("every factor must have dimension at least 3, got {dims:?}")));
    }
    let n: usize = dims.iter().sum();
    let nf = n as f64;
    // log prod_j (h_j / sqrt n_j)^{n_j / n}
    let log_geo: f64 =
        dims.iter().zip(entropies).map(|(&nj, hj)| (nj as f64 / nf) * (hj / (nj as f64).sqrt()).ln()).sum();
    let alphas = dims.iter().zip(entropies).map(|(&ni, hi)| ((hi / (ni as f64).sqrt()).ln() - log_geo).exp()).collect();
    let h_min = nf.sqrt() * log_geo.exp();
    Ok(ScalingProfile {
        dims: dims.to_vec(),
        entropies: entropies.to_vec(),
        alphas,
        total_dim: n,
        h_min,
        gm_factor: h_min * h_min / (4.0 * nf),
        within_hypotheses: !small,
    })
}

/// Builds the profile; factors of dimension below 3 are a hypothesis violation.
pub fn min_entropy_profile(dims: &[usize], entropies: &[f64]) -> Result<ScalingProfile> {
    build(dims, entropies, false)
}

/// Same formulas without the dimension hypothesis; the result is flagged
/// `within_hypotheses = false` when any factor has dimension below 3.
pub fn min_entropy_profile_forced(dims: &[usize], entropies: &[f64]) -> Result<ScalingProfile> {
    build(dims, entropies, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_h3_factors() {
        let p = min_entropy_profile(&[3, 3], &[2.0, 2.0]).unwrap();
        assert!((p.alphas[0] - 1.0).abs() < 1e-12);
        assert!((p.alphas[1] - 1.0).abs() < 1e-12);
        assert!((p.h_min - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((p.gm_factor - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.jacobian_bound() - 27.0).abs() < 1e-9);
    }

    #[test]
    fn identical_factors_cancel() {
        for k in 1..5 {
            let dims = vec![4; k];
            let hs = vec![3.0; k];
            let p = min_entropy_profile(&dims, &hs).unwrap();
            assert!(p.alphas.iter().all(|a| (a - 1.0).abs() < 1e-12));
            let expect = ((4 * k) as f64).sqrt() * 3.0 / 2.0;
            assert!((p.h_min - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_h3_h4_closed_form() {
        let p = min_entropy_profile(&[3, 4], &[2.0, 3.0]).unwrap();
        let expect = 7f64.sqrt() * (2.0 / 3f64.sqrt()).powf(3.0 / 7.0) * (3.0f64 / 2.0).powf(4.0 / 7.0);
        assert!((p.h_min - expect).abs() < 1e-12);
        assert!((p.h_min - 3.5476).abs() < 1e-4);
        for i in 0..2 {
            let n = [3.0f64, 4.0];
            let h = [2.0f64, 3.0];
            let prod: f64 = (0..2).map(|j| (n[j].sqrt() / h[j]).powf(n[j] / 7.0)).product();
            assert!((p.alphas[i] - h[i] / n[i].sqrt() * prod).abs() < 1e-12);
        }
    }

    #[test]
    fn small_factor_needs_forcing() {
        assert!(matches!(min_entropy_profile(&[2, 3], &[1.0, 2.0]), Err(Error::HypothesisViolation(_))));
        let p = min_entropy_profile_forced(&[2, 3], &[1.0, 2.0]).unwrap();
        assert!(!p.within_hypotheses);
    }

    #[test]
    fn bad_inputs() {
        assert!(min_entropy_profile(&[], &[]).is_err());
        assert!(min_entropy_profile(&[3], &[2.0, 1.0]).is_err());
        assert!(min_entropy_profile(&[3], &[0.0]).is_err());
    }
}
