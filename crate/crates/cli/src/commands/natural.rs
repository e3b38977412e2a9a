use entlab_core::barycenter::{natural_map_discrete, random_configuration};
use entlab_core::hyperbolic::HyperboloidPoint;
use entlab_core::product::{min_entropy_profile, ProductPoint};
use serde_json::json;

use super::short;
use crate::config::RunConfig;
use crate::report::{Failure, Outcome, Runner, Table};

pub fn run(cfg: &RunConfig, r: &mut Runner) {
    let nm = cfg.natural_map.clone();
    let seed = cfg.run.seed;
    let profile = min_entropy_profile(&cfg.profile.dims, &cfg.entropies()).map_err(Failure::from);

    r.check("natural_map.equidistant", || {
        let p = profile.clone()?;
        let o = ProductPoint::origin(&p);
        // mirror images in the first factor, base point elsewhere
        let mirrored = |s: f64| {
            let mut spatial = vec![0.0; p.dims[0]];
            spatial[0] = s;
            let mut f = vec![HyperboloidPoint::from_spatial(&spatial)];
            f.extend(p.dims[1..].iter().map(|&m| HyperboloidPoint::origin(m)));
            ProductPoint::new(f)
        };
        let c = nm.c_factor * p.h_min;
        let s = natural_map_discrete(&[mirrored(1.0)?, mirrored(-1.0)?], c, &o, &p)?;
        let err = s.components.iter().map(|x| (x - 0.5f64.sqrt()).abs()).fold(0.0, f64::max);
        let tol = 1e-12;
        Ok(Outcome {
            inputs: json!({ "c": c, "points": 2 }),
            outputs: json!({ "components": s.components, "max_error": err }),
            pass: err <= tol,
            tolerance: tol,
            summary: format!("components ({}), error {err:.1e}", super::list(&s.components)),
        })
    });

    let mut table = Table::new("natural_map", &["draw", "atoms", "energy", "bound", "ratio"]);
    r.check("natural_map.energy_bound", || {
        let p = profile.clone()?;
        let c = nm.c_factor * p.h_min;
        let mut worst: f64 = 0.0;
        let mut exceed = 0;
        for k in 0..nm.draws {
            let atoms = 2 + k % (nm.max_atoms - 1);
            let base = seed.wrapping_mul(1_000_003).wrapping_add(2 * k as u64);
            let pts = random_configuration(&p, atoms, nm.radius, base)?;
            let x = random_configuration(&p, 1, nm.radius, base + 1)?.points()[0].clone();
            let s = natural_map_discrete(pts.points(), c, &x, &p)?;
            let ratio = s.energy / s.bound;
            worst = worst.max(ratio);
            if ratio > 1.0 + nm.slack {
                exceed += 1;
            }
            table.push(vec![
                k.to_string(),
                atoms.to_string(),
                s.energy.to_string(),
                s.bound.to_string(),
                ratio.to_string(),
            ]);
        }
        Ok(Outcome {
            inputs: json!({ "draws": nm.draws, "c": c, "c_factor": nm.c_factor, "radius": nm.radius, "seed": seed }),
            outputs: json!({ "max_energy_over_bound": worst, "exceedances": exceed }),
            pass: exceed == 0,
            tolerance: nm.slack,
            summary: format!("max energy / (c^2/4) = {} over {} draws", short(worst), nm.draws),
        })
    });
    r.table(table);
}
