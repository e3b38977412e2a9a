use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::solver::{BarycenterProblem, BarycenterSolution};
use crate::error::{Error, Result};
use crate::hyperbolic::parallel_transport;
use crate::product::{product_dist, ProductPoint};

/// `H_f` and `K_f` at a point, in a `g_min`-orthonormal frame, together with
/// the per-factor reductions `H_i` (trace one) and `K_i`.
#[derive(Debug, Clone)]
pub struct FormPair {
    pub h: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub factor_h: Vec<DMatrix<f64>>,
    pub factor_k: Vec<DMatrix<f64>>,
}

impl FormPair {
    /// `2^n (det H)^{1/2} / det K`, the Jacobian estimate.
    pub fn jacobian_estimate(&self) -> Result<f64> {
        let n = self.h.nrows() as f64;
        let ld_h = log_det_psd(&self.h);
        let ld_k = log_det_pd(&self.k).ok_or_else(|| Error::Singular("K_f is not positive definite".into()))?;
        Ok((n * std::f64::consts::LN_2 + 0.5 * ld_h - ld_k).exp())
    }

    /// Largest eigenvalue of each per-factor `H_i`.
    pub fn factor_top_eigenvalues(&self) -> Vec<f64> {
        self.factor_h
            .iter()
            .map(|h| SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }
}

/// `log det` of a symmetric positive semidefinite matrix (`-inf` if singular).
pub(crate) fn log_det_psd(a: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(a.clone()).eigenvalues.iter().map(|l| if *l > 0.0 { l.ln() } else { f64::NEG_INFINITY }).sum()
}

fn log_det_pd(a: &DMatrix<f64>) -> Option<f64> {
    let ch = a.clone().cholesky()?;
    Some(2.0 * ch.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

impl BarycenterProblem {
    pub fn form_pair_at(&self, x: &ProductPoint) -> Result<FormPair> {
        let profile = self.profile();
        x.check_profile(profile)?;
        let k = profile.k();
        let kf = k as f64;
        let n = profile.total_dim;
        let sums: Vec<_> = (0..k).map(|i| self.factor_sums(x.factor(i), i, true)).collect();
        let weights = self.config().weights();
        let mut h = DMatrix::zeros(n, n);
        let mut kk = DMatrix::zeros(n, n);
        let mut factor_h = Vec::with_capacity(k);
        let mut factor_k = Vec::with_capacity(k);
        for i in 0..k {
            let oi = profile.offset(i);
            let mi = profile.dims[i];
            let hi = sums[i].second.clone();
            let ki = DMatrix::identity(mi, mi) - &hi;
            h.view_mut((oi, oi), (mi, mi)).copy_from(&hi.scale(1.0 / kf));
            kk.view_mut((oi, oi), (mi, mi)).copy_from(&ki.scale(1.0 / (profile.alphas[i] * kf.sqrt())));
            // the product measure factorizes, so cross blocks only see the means
            for i2 in (i + 1)..k {
                let o2 = profile.offset(i2);
                let m2 = profile.dims[i2];
                let mut cross = DMatrix::zeros(mi, m2);
                for (j, w) in weights.iter().enumerate() {
                    cross += (&sums[i].atom_means[j] * sums[i2].atom_means[j].transpose()).scale(*w);
                }
                cross /= kf;
                h.view_mut((oi, o2), (mi, m2)).copy_from(&cross);
                h.view_mut((o2, oi), (m2, mi)).copy_from(&cross.transpose());
            }
            factor_h.push(hi);
            factor_k.push(ki);
        }
        Ok(FormPair { h, k: kk, factor_h, factor_k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BcgCheck {
    /// `(det H)^{1/2} / det(Id - H)`.
    pub ratio: f64,
    /// `(sqrt n / h)^n`.
    pub bound: f64,
    pub holds: bool,
    /// `1 - ratio / bound`.
    pub equality_gap: f64,
    /// Frobenius distance from `Id / n`.
    pub anisotropy: f64,
}

/// The determinant inequality `(det H)^{1/2} / det(Id - H) <= (sqrt n / h)^n`
/// for a trace-one symmetric positive semidefinite `H`, evaluated in log space.
pub fn bcg_inequality_check(h: &DMatrix<f64>, n: usize, entropy: f64) -> Result<BcgCheck> {
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.nrows() });
    }
    if !(entropy > 0.0) {
        return Err(Error::InvalidArgument(format!("entropy must be positive, got {entropy}")));
    }
    let tr = h.trace();
    if (tr - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("trace(H) = {tr}, expected 1")));
    }
    let sym = (h + h.transpose()).scale(0.5);
    let eig = SymmetricEigen::new(sym.clone()).eigenvalues;
    if eig.iter().any(|l| *l < -1e-12) {
        return Err(Error::InvalidArgument("H is not positive semidefinite".into()));
    }
    if eig.iter().any(|l| 1.0 - l <= 0.0) {
        return Err(Error::Singular("det(Id - H) <= 0".into()));
    }
    let ld_h: f64 = eig.iter().map(|l| if *l > 0.0 { l.ln() } else { f64::NEG_INFINITY }).sum();
    let ld_k: f64 = eig.iter().map(|l| (1.0 - l).ln()).sum();
    let nf = n as f64;
    let log_ratio = 0.5 * ld_h - ld_k;
    let log_bound = nf * (nf.sqrt() / entropy).ln();
    let iso = DMatrix::identity(n, n).scale(1.0 / nf);
    Ok(BcgCheck {
        ratio: log_ratio.exp(),
        bound: log_bound.exp(),
        // relative rounding allowance for the equality case
        holds: log_ratio <= log_bound + 1e-12,
        equality_gap: 1.0 - (log_ratio - log_bound).exp(),
        anisotropy: (sym - iso).norm(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BcgCampaign {
    pub n: usize,
    pub trials: usize,
    pub violations: usize,
    /// Largest `ratio / bound` seen.
    pub max_ratio: f64,
    /// Trials within `1e-6` of `Id / n` (where equality may occur).
    pub near_isotropic: usize,
    /// Trials away from `Id / n` whose gap was not strictly positive.
    pub non_strict: usize,
    pub seed: u64,
}

/// Random trace-one PSD matrix with eigenvalues below one, drawn from a mix
/// of Wishart, Dirichlet-spectrum, low-rank and near-isotropic families.
pub fn random_trace_one<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let nf = n as f64;
    loop {
        let family = rng.random_range(0..4);
        let h = match family {
            0 => {
                let g = gaussian(n, n, rng);
                &g * g.transpose()
            }
            1 => {
                let spectrum: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
                let q = random_orthogonal(n, rng);
                &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(spectrum)) * q.transpose()
            }
            2 => {
                let r = rng.random_range(2..=n);
                let g = gaussian(n, r, rng);
                &g * g.transpose()
            }
            _ => {
                let scale = 10f64.powf(-rng.random_range(1.0..8.0));
                let e = DMatrix::from_fn(n, n, |_, _| {
                    let g: f64 = StandardNormal.sample(rng);
                    scale * g / nf
                });
                let e = (&e + e.transpose()).scale(0.5);
                let e = &e - DMatrix::identity(n, n).scale(e.trace() / nf);
                DMatrix::identity(n, n).scale(1.0 / nf) + e
            }
        };
        let tr = h.trace();
        if !(tr > 0.0) {
            continue;
        }
        let h = h.scale(1.0 / tr);
        let eig = SymmetricEigen::new(h.clone()).eigenvalues;
        if eig.iter().all(|l| *l > -1e-14 && *l < 1.0 - 1e-9) {
            return h;
        }
    }
}

fn gaussian<R: Rng>(r: usize, c: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = gaussian(n, n, rng);
    g.qr().q()
}

/// Randomized search for a violation of the determinant inequality with `h = n - 1`.
pub fn bcg_campaign(n: usize, trials: usize, seed: u64) -> Result<BcgCampaign> {
    if n < 2 {
        return Err(Error::InvalidArgument("campaign needs n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut out = BcgCampaign { n, trials, violations: 0, max_ratio: 0.0, near_isotropic: 0, non_strict: 0, seed };
    for _ in 0..trials {
        let h = random_trace_one(n, &mut rng);
        let c = bcg_inequality_check(&h, n, n as f64 - 1.0)?;
        if !c.holds {
            out.violations += 1;
        }
        out.max_ratio = out.max_ratio.max(c.ratio / c.bound);
        if c.anisotropy < 1e-6 {
            out.near_isotropic += 1;
        } else if c.equality_gap <= 0.0 {
            out.non_strict += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianReport {
    pub estimate: f64,
    pub bound: f64,
    pub holds: bool,
    /// `estimate / bound`.
    pub saturation: f64,
    pub factor_top_eigenvalues: Vec<f64>,
    pub barycenter: BarycenterSolution,
}

impl BarycenterProblem {
    /// Solves for the barycenter and reports both sides of the Jacobian bound there.
    pub fn jacobian_bound_report(&self, tol: f64, max_iter: usize) -> Result<JacobianReport> {
        let sol = self.solve(tol, max_iter)?;
        let forms = self.form_pair_at(&sol.point)?;
        let tops = forms.factor_top_eigenvalues();
        if let Some((factor, &eigenvalue)) = tops.iter().enumerate().find(|(_, l)| **l >= 1.0 - 1e-6) {
            return Err(Error::NearSingular { factor, eigenvalue });
        }
        let estimate = forms.jacobian_estimate()?;
        let bound = self.profile().jacobian_bound();
        Ok(JacobianReport {
            estimate,
            bound,
            holds: estimate <= bound * (1.0 + 1e-9),
            saturation: estimate / bound,
            factor_top_eigenvalues: tops,
            barycenter: sol,
        })
    }

    /// `|H_{f'} o P - H_f| / (d(Bar f, Bar f') + |f - f'|)` with `P` the parallel
    /// transport along the connecting geodesic (operator norms, `g_min` frames).
    pub fn form_lipschitz_ratio(
        &self,
        other: &BarycenterProblem,
        tol: f64,
        max_iter: usize,
    ) -> Result<LipschitzSample> {
        let a = self.solve(tol, max_iter)?;
        let b = other.solve(tol, max_iter)?;
        let ha = self.form_pair_at(&a.point)?.h;
        let hb = other.form_pair_at(&b.point)?.h;
        let profile = self.profile();
        // T: frame at Bar f, transported, in frame components at Bar f'.
        let n = profile.total_dim;
        let mut t = DMatrix::zeros(n, n);
        for i in 0..profile.k() {
            let off = profile.offset(i);
            let m = profile.dims[i];
            let xa = a.point.factor(i);
            let xb = b.point.factor(i);
            for c in 0..m {
                let mut e = vec![0.0; m];
                e[c] = 1.0;
                let v = xa.tangent_from_frame(&e)?;
                let pv = parallel_transport(xa, xb, &v)?.frame_components();
                t.view_mut((off, off + c), (m, 1)).copy_from(&pv);
            }
        }
        let transported = t.transpose() * &hb * &t;
        let diff = SymmetricEigen::new(transported - &ha).eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
        let dist = product_dist(&a.point, &b.point, &profile.alphas)?;
        let l2: f64 = self
            .config()
            .weights()
            .iter()
            .zip(other.config().weights())
            .map(|(w, w2)| (w.sqrt() - w2.sqrt()).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(LipschitzSample {
            form_change: diff,
            barycenter_shift: dist,
            weight_change: l2,
            ratio: if dist + l2 > 0.0 { diff / (dist + l2) } else { 0.0 },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzSample {
    pub form_change: f64,
    pub barycenter_shift: f64,
    pub weight_change: f64,
    pub ratio: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_matrix_attains_equality() {
        for n in 3..=6 {
            let h = DMatrix::identity(n, n).scale(1.0 / n as f64);
            let c = bcg_inequality_check(&h, n, n as f64 - 1.0).unwrap();
            assert!(c.holds);
            assert!(c.equality_gap.abs() < 1e-9, "n={n} gap={}", c.equality_gap);
        }
        let c = bcg_inequality_check(&DMatrix::identity(3, 3).scale(1.0 / 3.0), 3, 2.0).unwrap();
        assert!((c.ratio - 3.0 * 3f64.sqrt() / 8.0).abs() < 1e-12);
    }

    #[test]
    fn one_thin_direction_is_far_below_bound() {
        let eps = 1e-4;
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5 - eps, 0.5 - eps, 2.0 * eps]));
        let c = bcg_inequality_check(&h, 3, 2.0).unwrap();
        assert!(c.ratio < 0.1 * c.bound);
    }

    #[test]
    fn rank_one_limit_stays_below_bound() {
        // ratio -> eps / (2 eps) = 1/2 < (sqrt 3 / 2)^3
        let eps = 1e-8;
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0 - 2.0 * eps, eps, eps]));
        let c = bcg_inequality_check(&h, 3, 2.0).unwrap();
        assert!((c.ratio - 0.5).abs() < 1e-6 && c.holds);
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert!(matches!(bcg_inequality_check(&h, 3, 2.0), Err(Error::Singular(_))));
        let h = DMatrix::identity(3, 3);
        assert!(bcg_inequality_check(&h, 3, 2.0).is_err());
    }

    #[test]
    fn small_campaign_finds_no_violation() {
        for n in 3..=5 {
            let c = bcg_campaign(n, 500, 11).unwrap();
            assert_eq!(c.violations, 0);
            assert_eq!(c.non_strict, 0);
        }
    }
}
