use entlab_core::product::min_entropy_profile;
use serde_json::json;

use super::{list, short};
use crate::config::RunConfig;
use crate::report::{Outcome, Runner, Table};

pub fn run(cfg: &RunConfig, r: &mut Runner) {
    let dims = cfg.profile.dims.clone();
    let entropies = cfg.entropies();
    let mut table = Table::new("profile", &["factor", "dim", "entropy", "alpha"]);
    r.check("entropy.profile", || {
        let p = min_entropy_profile(&dims, &entropies)?;
        let n = p.total_dim as f64;
        let tol = 1e-12;
        // the normalization identities that define the profile
        let log_volume: f64 = dims.iter().zip(&p.alphas).map(|(&m, a)| m as f64 * a.ln()).sum();
        let norm_residual = p.entropy_norm_sq() / (p.h_min * p.h_min) - 1.0;
        let gm_residual = p.gm_factor - p.h_min * p.h_min / (4.0 * n);
        for (i, ((m, h), a)) in dims.iter().zip(&entropies).zip(&p.alphas).enumerate() {
            table.push(vec![i.to_string(), m.to_string(), h.to_string(), a.to_string()]);
        }
        Ok(Outcome {
            inputs: json!({ "dims": dims, "entropies": entropies }),
            outputs: json!({
                "h_min": p.h_min,
                "alphas": p.alphas,
                "gm_factor": p.gm_factor,
                "total_dim": p.total_dim,
                "weighted_entropy_ratio": p.weighted_entropy_ratio(),
                "log_volume_residual": log_volume,
                "entropy_norm_residual": norm_residual,
                "gm_factor_residual": gm_residual,
            }),
            pass: log_volume.abs() <= tol
                && norm_residual.abs() <= tol
                && gm_residual.abs() <= tol * p.gm_factor.max(1.0),
            tolerance: tol,
            summary: format!(
                "h_min = {}, alpha = ({}), gm_factor = {}",
                short(p.h_min),
                list(&p.alphas),
                short(p.gm_factor)
            ),
        })
    });
    r.table(table);
}
