use entlab_core::barycenter::{bcg_campaign, bcg_inequality_check, BcgCampaign};
use nalgebra::DMatrix;
use serde_json::json;

use super::short;
use crate::config::RunConfig;
use crate::report::{Outcome, Runner, Table};

pub fn run(cfg: &RunConfig, r: &mut Runner) {
    let b = cfg.bcg.clone();
    let seed = cfg.run.seed;
    let mut campaigns: Vec<BcgCampaign> = Vec::new();
    for &n in &b.dims {
        r.check("bcg.campaign", || {
            let c = bcg_campaign(n, b.trials, seed)?;
            let out = Outcome {
                inputs: json!({ "n": n, "trials": b.trials, "seed": seed, "entropy": n as f64 - 1.0 }),
                outputs: json!({ "violations": c.violations, "max_ratio_over_bound": c.max_ratio,
                                 "near_isotropic": c.near_isotropic, "non_strict": c.non_strict }),
                pass: c.violations == 0 && c.non_strict == 0,
                tolerance: 0.0,
                summary: format!(
                    "n = {n}: {} violations in {} trials, max ratio/bound {}",
                    c.violations,
                    c.trials,
                    short(c.max_ratio)
                ),
            };
            campaigns.push(c);
            Ok(out)
        });
        r.check("bcg.equality", || {
            let h = DMatrix::<f64>::identity(n, n).scale(1.0 / n as f64);
            let c = bcg_inequality_check(&h, n, n as f64 - 1.0)?;
            let nf = n as f64;
            // (sqrt n / (n - 1))^n in closed form
            let expected = (nf.sqrt() / (nf - 1.0)).powi(n as i32);
            let err = (c.ratio / expected - 1.0).abs().max((c.bound / expected - 1.0).abs());
            Ok(Outcome {
                inputs: json!({ "n": n, "h": "Id / n" }),
                outputs: json!({ "ratio": c.ratio, "bound": c.bound, "closed_form": expected, "relative_error": err }),
                pass: err <= b.equality_tol && c.holds,
                tolerance: b.equality_tol,
                summary: format!("n = {n}: ratio {} = bound, relative error {err:.1e}", short(c.ratio)),
            })
        });
    }
    let mut table = Table::new(
        "bcg",
        &["n", "trials", "violations", "max_ratio_over_bound", "near_isotropic", "non_strict", "seed"],
    );
    for c in &campaigns {
        table.push(vec![
            c.n.to_string(),
            c.trials.to_string(),
            c.violations.to_string(),
            c.max_ratio.to_string(),
            c.near_isotropic.to_string(),
            c.non_strict.to_string(),
            c.seed.to_string(),
        ]);
    }
    r.table(table);
}
