use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::profile::ScalingProfile;
use crate::error::{Error, Result};
use crate::stats::{fit_line, log_add, log_sinh, log_sum_exp};

/// Number of radii at which `log V` is sampled for the fit.
const FIT_POINTS: usize = 41;
const MC_DIRECTIONS: usize = 16_384;
const MC_BATCHES: usize = 8;
const DEFAULT_MC_SEED: u64 = 0x5eed_0e17;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum GrowthMethod {
    /// One factor, cumulative midpoint rule.
    Radial,
    /// Two factors, nested midpoint rule over the quarter disc.
    Nested,
    /// Three or more factors, Monte Carlo over directions in the positive orthant.
    MonteCarlo { seed: u64, directions: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the linear fit of `log V` against `rho`.
    pub residual: f64,
    /// Standard error of the slope. For Monte Carlo this is the spread across batches.
    pub slope_err: f64,
    pub radii: Vec<f64>,
    pub log_volumes: Vec<f64>,
    pub method: GrowthMethod,
}

/// Entropy of the unscaled product `g_0` estimated from volume growth:
/// the least-squares slope of `log V(rho)` over `[rho_lo, rho_hi]`, where
/// `V(rho) = int_{sum r_i^2 <= rho^2} prod sinh^{n_i - 1}(r_i) dr`.
pub fn entropy_growth_numeric(dims: &[usize], rho_lo: f64, rho_hi: f64, step: f64) -> Result<GrowthEstimate> {
    let alphas = vec![1.0; dims.len()];
    growth(dims, &alphas, rho_lo, rho_hi, step, DEFAULT_MC_SEED)
}

/// The same estimate for `g_min = (+) alpha_i^2 g_i`; the slope approximates `h_min`.
pub fn entropy_growth_scaled(
    profile: &ScalingProfile,
    rho_lo: f64,
    rho_hi: f64,
    step: f64,
    seed: u64,
) -> Result<GrowthEstimate> {
    growth(&profile.dims, &profile.alphas, rho_lo, rho_hi, step, seed)
}

/// Like [`entropy_growth_numeric`] with an explicit Monte Carlo seed (used for `k >= 3`).
pub fn entropy_growth_seeded(dims: &[usize], rho_lo: f64, rho_hi: f64, step: f64, seed: u64) -> Result<GrowthEstimate> {
    let alphas = vec![1.0; dims.len()];
    growth(dims, &alphas, rho_lo, rho_hi, step, seed)
}

fn growth(dims: &[usize], alphas: &[f64], rho_lo: f64, rho_hi: f64, step: f64, seed: u64) -> Result<GrowthEstimate> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidArgument(format!("bad factor dimensions {dims:?}")));
    }
    if !(rho_lo >= 5.0) || !(rho_hi > rho_lo) || !rho_hi.is_finite() {
        return Err(Error::Precondition(format!("need rho_hi > rho_lo >= 5, got [{rho_lo}, {rho_hi}]")));
    }
    if !(step > 0.0 && step <= 0.05) {
        return Err(Error::Precondition(format!("grid step must lie in (0, 0.05], got {step}")));
    }
    if alphas.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::InvalidArgument("scalings must be positive".into()));
    }
    let radii: Vec<f64> =
        (0..FIT_POINTS).map(|i| rho_lo + (rho_hi - rho_lo) * i as f64 / (FIT_POINTS - 1) as f64).collect();

    let (log_volumes, method, batch_slopes) = match dims.len() {
        1 => {
            let cum = Cumulative::new(dims[0], rho_hi / alphas[0], step);
            let lv = radii.iter().map(|r| cum.log_at(r / alphas[0])).collect();
            (lv, GrowthMethod::Radial, None)
        }
        2 => (nested(dims, alphas, &radii, step), GrowthMethod::Nested, None),
        _ => {
            let (lv, slopes) = monte_carlo(dims, alphas, &radii, step, seed);
            (lv, GrowthMethod::MonteCarlo { seed, directions: MC_DIRECTIONS }, Some(slopes))
        }
    };

    let fit = fit_line(&radii, &log_volumes);
    let slope_err = match batch_slopes {
        Some(s) => {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            let var = s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (s.len() - 1) as f64;
            (var / s.len() as f64).sqrt().max(fit.slope_err)
        }
        None => fit.slope_err,
    };
    Ok(GrowthEstimate {
        slope: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        slope_err,
        radii,
        log_volumes,
        method,
    })
}

/// Cumulative `log int_0^R sinh^{n-1}(r) dr` by the midpoint rule on a fixed grid,
/// with the last partial cell integrated at its own midpoint so the result is
/// continuous in `R`.
struct Cumulative {
    power: f64,
    step: f64,
    /// `prefix[j] = log int_0^{j step}`.
    prefix: Vec<f64>,
}

impl Cumulative {
    fn new(n: usize, r_max: f64, step: f64) -> Self {
        let power = n as f64 - 1.0;
        let cells = (r_max / step).ceil() as usize + 1;
        let mut prefix = Vec::with_capacity(cells + 1);
        prefix.push(f64::NEG_INFINITY);
        let log_step = step.ln();
        for j in 0..cells {
            let mid = (j as f64 + 0.5) * step;
            let cell = log_step + power * log_sinh(mid);
            let prev = prefix[j];
            prefix.push(log_add(prev, cell));
        }
        Self { power, step, prefix }
    }

    fn log_density(&self, r: f64) -> f64 {
        if self.power == 0.0 {
            0.0
        } else {
            self.power * log_sinh(r)
        }
    }

    fn log_at(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let j = ((r / self.step).floor() as usize).min(self.prefix.len() - 1);
        let rest = r - j as f64 * self.step;
        if rest <= 0.0 {
            return self.prefix[j];
        }
        let partial = rest.ln() + self.log_density(j as f64 * self.step + 0.5 * rest);
        log_add(self.prefix[j], partial)
    }
}

fn nested(dims: &[usize], alphas: &[f64], radii: &[f64], step: f64) -> Vec<f64> {
    let rho_hi = radii[radii.len() - 1];
    let inner = Cumulative::new(dims[1], rho_hi / alphas[1], step);
    let p1 = dims[0] as f64 - 1.0;
    radii
        .iter()
        .map(|&rho| {
            let r1_max = rho / alphas[0];
            let full = (r1_max / step).floor() as usize;
            let mut cells: Vec<(f64, f64)> = (0..full).map(|j| ((j as f64 + 0.5) * step, step)).collect();
            let rest = r1_max - full as f64 * step;
            if rest > 0.0 {
                cells.push((full as f64 * step + 0.5 * rest, rest));
            }
            log_sum_exp(cells.into_iter().map(|(r1, w)| {
                let y2 = (rho * rho - (alphas[0] * r1).powi(2)).max(0.0).sqrt();
                let outer = if p1 == 0.0 { 0.0 } else { p1 * log_sinh(r1) };
                w.ln() + outer + inner.log_at(y2 / alphas[1])
            }))
        })
        .collect()
}

/// Polar coordinates in `y_i = alpha_i r_i`: `V(rho) = int_{S_+} int_0^rho
/// prod sinh^{n_i-1}(t u_i / alpha_i) t^{k-1} dt du`, up to a constant factor.
fn monte_carlo(dims: &[usize], alphas: &[f64], radii: &[f64], step: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let k = dims.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho_hi = radii[radii.len() - 1];
    let cells = (rho_hi / step).ceil() as usize;
    let per_batch = MC_DIRECTIONS / MC_BATCHES;
    // batch_logs[b][i] = log sum over directions in batch b at radius i
    let mut batch_logs = vec![vec![f64::NEG_INFINITY; radii.len()]; MC_BATCHES];
    let log_density = |t: f64, u: &[f64]| -> f64 {
        let mut s = (k as f64 - 1.0) * t.ln();
        for i in 0..k {
            let p = dims[i] as f64 - 1.0;
            if p > 0.0 {
                s += p * log_sinh(t * u[i] / alphas[i]);
            }
        }
        s
    };
    let mut u = vec![0.0; k];
    let mut prefix = vec![f64::NEG_INFINITY; cells + 1];
    for logs in batch_logs.iter_mut() {
        for _ in 0..per_batch {
            let mut norm = 0.0;
            for ui in u.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *ui = g.abs();
                norm += g * g;
            }
            let norm = norm.sqrt();
            u.iter_mut().for_each(|x| *x /= norm);
            for j in 0..cells {
                let mid = (j as f64 + 0.5) * step;
                prefix[j + 1] = log_add(prefix[j], step.ln() + log_density(mid, &u));
            }
            for (i, &rho) in radii.iter().enumerate() {
                let j = ((rho / step).floor() as usize).min(cells);
                let rest = rho - j as f64 * step;
                let mut v = prefix[j];
                if rest > 0.0 {
                    v = log_add(v, rest.ln() + log_density(j as f64 * step + 0.5 * rest, &u));
                }
                logs[i] = log_add(logs[i], v);
            }
        }
    }
    let total: Vec<f64> =
        (0..radii.len()).map(|i| log_sum_exp(batch_logs.iter().map(|b| b[i])) - (MC_DIRECTIONS as f64).ln()).collect();
    let slopes = batch_logs.iter().map(|b| fit_line(radii, b).slope).collect();
    (total, slopes)
}
