use entlab_core::gh::{
    approximation_check, build_net_graph, covering_radius, delta_bound, gh_bounds, graph_metric, greedy_net,
    measure_compare, CircleMetric, FiniteMetricSpace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::short;
use crate::config::{ConfigError, RunConfig, SpaceKind};
use crate::report::{Failure, Outcome, Runner, Table};

fn target_space(cfg: &RunConfig) -> Result<FiniteMetricSpace, ConfigError> {
    let n = cfg.ghnet_samples();
    let built = match cfg.ghnet.space {
        SpaceKind::Circle => FiniteMetricSpace::circle(n, CircleMetric::Arc),
        SpaceKind::Torus => FiniteMetricSpace::flat_torus(n),
        SpaceKind::Tree => FiniteMetricSpace::random_tree(n, 0.1, cfg.run.seed),
        SpaceKind::Csv => {
            let path = cfg.ghnet.path.as_ref().expect("validated");
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::field("ghnet.path", format!("cannot read {}: {e}", path.display())))?;
            FiniteMetricSpace::from_csv(&text)
        }
    };
    built.map_err(|e| ConfigError::field("ghnet.space", e.to_string()))
}

fn random_planar(n: usize, rng: &mut ChaCha8Rng) -> FiniteMetricSpace {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    FiniteMetricSpace::from_metric(n, |i, j| (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1))
        .expect("Euclidean distances are a metric")
}

/// Half the least distortion over every relation covering both spaces.
fn exhaustive_gh(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    let (nx, ny) = (x.len(), y.len());
    let mut best = f64::INFINITY;
    for mask in 1u64..(1 << (nx * ny)) {
        let pairs: Vec<(usize, usize)> =
            (0..nx * ny).filter(|b| mask >> b & 1 == 1).map(|b| (b / ny, b % ny)).collect();
        let covers = (0..nx).all(|a| pairs.iter().any(|p| p.0 == a)) && (0..ny).all(|b| pairs.iter().any(|p| p.1 == b));
        if !covers {
            continue;
        }
        let mut dis: f64 = 0.0;
        for &(a, b) in &pairs {
            for &(c, d) in &pairs {
                dis = dis.max((x.d(a, c) - y.d(b, d)).abs());
            }
        }
        best = best.min(dis);
    }
    0.5 * best
}

pub fn run(cfg: &RunConfig, r: &mut Runner) -> Result<(), ConfigError> {
    let g = cfg.ghnet.clone();
    let target = target_space(cfg)?;
    let eps = g.eps;
    let delta = g.delta.unwrap_or(0.9 * delta_bound(eps, &target));
    let net_radius = g.net_radius.unwrap_or(eps / 4.0);
    let ident: Vec<usize> = (0..target.len()).collect();
    let space = json!({ "kind": g.space, "points": target.len(), "diameter": target.diameter() });

    let mut net: Option<Vec<usize>> = None;
    r.check("ghnet.net", || {
        let nv = greedy_net(&target, net_radius)?;
        let cover = covering_radius(&target, &nv);
        let mut separation = f64::INFINITY;
        for (k, &a) in nv.iter().enumerate() {
            for &b in &nv[k + 1..] {
                separation = separation.min(target.d(a, b));
            }
        }
        let out = Outcome {
            inputs: json!({ "space": space, "net_radius": net_radius }),
            outputs: json!({ "size": nv.len(), "covering_radius": cover, "separation": separation }),
            pass: cover < net_radius && separation >= net_radius,
            tolerance: net_radius,
            summary: format!("{} points, covering radius {}, separation {}", nv.len(), short(cover), short(separation)),
        };
        net = Some(nv);
        Ok(out)
    });
    let net = net.ok_or_else(|| Failure::Numerical("no net".into()));

    let graph =
        net.clone().and_then(|nv| build_net_graph(&nv, &ident, &target, eps, delta, g.n_count).map_err(Failure::from));
    r.check("ghnet.edge_intervals", || {
        let gr = graph.clone()?;
        let bad = gr.interval_violations(&target);
        Ok(Outcome {
            inputs: json!({ "eps": eps, "delta": delta, "n_count": g.n_count, "delta_bound": delta_bound(eps, &target) }),
            outputs: json!({ "edges": gr.edges.len(), "violations": bad }),
            pass: bad.is_empty(),
            tolerance: delta,
            summary: format!("{} edges, {} outside their interval", gr.edges.len(), bad.len()),
        })
    });

    let mut approx_row: Option<Vec<String>> = None;
    r.check("ghnet.approximation", || {
        let gr = graph.clone()?;
        let rep = approximation_check(&gr, &target, eps);
        approx_row = Some(vec![
            eps.to_string(),
            delta.to_string(),
            gr.vertices.len().to_string(),
            gr.edges.len().to_string(),
            rep.max_deviation.to_string(),
            rep.upper_excess.to_string(),
            rep.lower_excess.to_string(),
            rep.pass.to_string(),
        ]);
        Ok(Outcome {
            inputs: json!({ "eps": eps, "delta": delta, "net_size": gr.vertices.len() }),
            outputs: json!({ "max_deviation": rep.max_deviation, "upper_excess": rep.upper_excess,
                             "lower_excess": rep.lower_excess, "connected": rep.connected, "worst_pair": rep.worst_pair }),
            pass: rep.pass && rep.max_deviation <= eps,
            tolerance: eps,
            summary: format!("max deviation {} <= eps {}", short(rep.max_deviation), short(eps)),
        })
    });

    r.check("ghnet.gh_consistency", || {
        let gr = graph.clone()?;
        let gspace = graph_metric(&gr).to_space()?;
        let sub = target.subspace(&gr.images)?;
        let b = gh_bounds(&gspace, &sub);
        let mut distortion: f64 = 0.0;
        for i in 0..sub.len() {
            for j in 0..sub.len() {
                distortion = distortion.max((gspace.d(i, j) - sub.d(i, j)).abs());
            }
        }
        let tol = 1e-12;
        Ok(Outcome {
            inputs: json!({ "points": sub.len() }),
            outputs: json!({ "lower": b.lower, "upper": b.upper, "exact": b.exact, "identity_half_distortion": 0.5 * distortion }),
            pass: b.lower <= b.upper + tol && b.lower <= 0.5 * distortion + tol,
            tolerance: tol,
            summary: format!("GH in [{}, {}], identity gives {}", short(b.lower), short(b.upper), short(0.5 * distortion)),
        })
    });

    r.check("ghnet.gh_brute_force", || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
        let (mut cases, mut worst, mut inexact) = (0usize, 0.0f64, 0usize);
        for nx in 2..=4 {
            for ny in 2..=4 {
                for _ in 0..g.brute_force_reps {
                    let x = random_planar(nx, &mut rng);
                    let y = random_planar(ny, &mut rng);
                    let b = gh_bounds(&x, &y);
                    worst = worst.max((b.upper - exhaustive_gh(&x, &y)).abs());
                    inexact += usize::from(!b.exact || b.lower > b.upper + 1e-12);
                    cases += 1;
                }
            }
        }
        let tol = 1e-12;
        Ok(Outcome {
            inputs: json!({ "sizes": "2..=4 x 2..=4", "reps": g.brute_force_reps, "seed": cfg.run.seed }),
            outputs: json!({ "cases": cases, "max_error": worst, "inexact_or_misordered": inexact }),
            pass: worst <= tol && inexact == 0,
            tolerance: tol,
            summary: format!("{cases} cases, max |upper - exhaustive| = {worst:.1e}"),
        })
    });

    r.check("ghnet.measure", || {
        let nv = net.clone()?;
        // push the uniform measure to the nearest net point
        let nearest: Vec<usize> = (0..target.len())
            .map(|i| {
                *nv.iter()
                    .min_by(|&&a, &&b| target.d(i, a).total_cmp(&target.d(i, b)))
                    .expect("nonempty net")
            })
            .collect();
        let m = measure_compare(&target, &target, Some(&nearest))?;
        let cover = covering_radius(&target, &nv);
        let tol = 1e-9;
        Ok(Outcome {
            inputs: json!({ "map": "nearest net point", "net_size": nv.len() }),
            outputs: json!({ "discrepancy": m.discrepancy, "dual_bound": m.dual_bound, "gap": m.gap, "covering_radius": cover }),
            pass: m.gap <= tol && m.discrepancy <= cover + tol,
            tolerance: tol,
            summary: format!("transport {} (dual gap {:.1e}) <= covering radius {}", short(m.discrepancy), m.gap, short(cover)),
        })
    });

    let mut table = Table::new(
        "approximation",
        &["eps", "delta", "net_size", "edges", "max_deviation", "upper_excess", "lower_excess", "pass"],
    );
    if let Some(row) = approx_row {
        table.push(row);
    }
    r.table(table);
    Ok(())
}
