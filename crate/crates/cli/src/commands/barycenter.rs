use entlab_core::barycenter::{random_configuration, solution_spread, BarycenterProblem, WeightedConfiguration};
use entlab_core::hyperbolic::{
    boundary_quadrature, exp_map, log_map, BoundaryQuadrature, HyperboloidPoint, QuadratureScheme,
};
use entlab_core::product::{min_entropy_profile, product_dist, ProductPoint, ScalingProfile};
use nalgebra::{DMatrix, DVector};
use serde_json::json;

use super::short;
use crate::config::{RunConfig, Scheme};
use crate::report::{Failure, Outcome, Runner, Table};

/// Per-factor quadratures; Monte Carlo factor `i` uses `seed + i`.
pub(crate) fn quadratures(cfg: &RunConfig, profile: &ScalingProfile) -> Result<Vec<BoundaryQuadrature>, Failure> {
    let seed = cfg.quadrature_seed();
    profile
        .dims
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let scheme = match cfg.quadrature.scheme {
                Scheme::Deterministic => QuadratureScheme::Deterministic,
                Scheme::MonteCarlo => QuadratureScheme::MonteCarlo { seed: seed.wrapping_add(i as u64) },
            };
            boundary_quadrature(m, cfg.quadrature.count, scheme).map_err(Failure::from)
        })
        .collect()
}

/// Golden-section minimizer of a unimodal function on `[lo, hi]`.
fn golden(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-12 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

struct SweepRow {
    atoms: usize,
    trace_error: f64,
    estimate: f64,
    bound: f64,
    saturation: f64,
    holds: bool,
}

pub fn run(cfg: &RunConfig, r: &mut Runner) {
    let b = cfg.barycenter.clone();
    let (tol, max_iter) = (cfg.solver.tol, cfg.solver.max_iter);
    let seed = cfg.run.seed;
    let setup = min_entropy_profile(&cfg.profile.dims, &cfg.entropies())
        .map_err(Failure::from)
        .and_then(|p| quadratures(cfg, &p).map(|q| (p, q)));
    let setup = setup.as_ref().map_err(Clone::clone);
    let base = json!({ "dims": cfg.profile.dims, "quad_count": cfg.quadrature.count, "tol": tol });

    r.check("barycenter.fixed_point", || {
        let (p, q) = setup.clone()?;
        let atom = random_configuration(p, 1, b.radius, seed)?.points()[0].clone();
        let pr = BarycenterProblem::new(p, &WeightedConfiguration::single(atom.clone()), q)?;
        let sol = pr.solve_from(&ProductPoint::origin(p), tol, max_iter)?;
        let err = product_dist(&sol.point, &atom, &p.alphas)?;
        Ok(Outcome {
            inputs: base.clone(),
            outputs: json!({ "distance_to_atom": err, "iterations": sol.iterations, "gradient_norm": sol.gradient_norm }),
            pass: err <= b.fixed_point_tol,
            tolerance: b.fixed_point_tol,
            summary: format!("distance to the atom {err:.2e}"),
        })
    });

    r.check("barycenter.geodesic_midpoint", || {
        let (p, q) = setup.clone()?;
        let pts = random_configuration(p, 2, b.radius, seed.wrapping_add(1))?;
        let (a, c) = (pts.points()[0].factor(0).clone(), pts.points()[1].factor(0).clone());
        let rest: Vec<HyperboloidPoint> = p.dims[1..].iter().map(|&m| HyperboloidPoint::origin(m)).collect();
        let with = |x: HyperboloidPoint| {
            let mut f = vec![x];
            f.extend(rest.iter().cloned());
            ProductPoint::new(f)
        };
        let cfgn = WeightedConfiguration::new(vec![0.5, 0.5], vec![with(a.clone())?, with(c.clone())?])?;
        let pr = BarycenterProblem::new(p, &cfgn, q)?;
        let sol = pr.solve(tol, max_iter)?;
        let v = log_map(&a, &c)?;
        let along = |t: f64| with(exp_map(&a, &v, t).expect("same factor")).expect("same dims");
        let t_star = golden(0.0, 1.0, |t| pr.value(&along(t)).expect("profile checked"));
        let err = product_dist(&sol.point, &along(t_star), &p.alphas)?;
        let mid = product_dist(&sol.point, &along(0.5), &p.alphas)?;
        Ok(Outcome {
            inputs: base.clone(),
            outputs: json!({ "oracle_parameter": t_star, "error_vs_oracle": err, "distance_to_midpoint": mid }),
            pass: err <= b.midpoint_tol,
            tolerance: b.midpoint_tol,
            summary: format!("error vs geodesic oracle {err:.2e} (t* = {})", short(t_star)),
        })
    });

    r.check("barycenter.start_independence", || {
        let (p, q) = setup.clone()?;
        let c = random_configuration(p, b.max_atoms.max(2), b.radius, seed.wrapping_add(2))?;
        let pr = BarycenterProblem::new(p, &c, q)?;
        let mut sols = Vec::new();
        for (k, radius) in [0.0, 2.5, 4.0].into_iter().enumerate() {
            let start = random_configuration(p, 1, radius, seed.wrapping_add(10 + k as u64))?.points()[0].clone();
            sols.push(pr.solve_from(&start, tol, max_iter)?);
        }
        let spread = solution_spread(&sols, p)?;
        Ok(Outcome {
            inputs: json!({ "dims": cfg.profile.dims, "starts": 3, "tol": tol }),
            outputs: json!({ "spread": spread }),
            pass: spread <= 10.0 * tol,
            tolerance: 10.0 * tol,
            summary: format!("spread of three starts {spread:.2e}"),
        })
    });

    let mut rows: Option<Vec<SweepRow>> = None;
    r.check("barycenter.trace", || {
        let (p, q) = setup.clone()?;
        let mut out = Vec::with_capacity(b.configurations);
        for s in 0..b.configurations {
            let atoms = 1 + s % b.max_atoms;
            let c = random_configuration(p, atoms, b.radius, seed.wrapping_add(100 + s as u64))?;
            let pr = BarycenterProblem::new(p, &c, q)?;
            let rep = pr.jacobian_bound_report(tol, max_iter)?;
            let forms = pr.form_pair_at(&rep.barycenter.point)?;
            out.push(SweepRow {
                atoms,
                trace_error: (forms.h.trace() - 1.0).abs(),
                estimate: rep.estimate,
                bound: rep.bound,
                saturation: rep.saturation,
                holds: rep.holds,
            });
        }
        let worst = out.iter().map(|r| r.trace_error).fold(0.0, f64::max);
        rows = Some(out);
        Ok(Outcome {
            inputs: json!({ "configurations": b.configurations, "max_atoms": b.max_atoms, "radius": b.radius }),
            outputs: json!({ "max_trace_error": worst }),
            pass: worst <= b.trace_tol,
            tolerance: b.trace_tol,
            summary: format!("max |trace H - 1| = {worst:.2e} over {} configurations", b.configurations),
        })
    });

    r.check("barycenter.jacobian_bound", || {
        let rows = rows.as_ref().ok_or_else(|| Failure::Numerical("configuration sweep did not complete".into()))?;
        let violations = rows.iter().filter(|r| !r.holds).count();
        let max_sat = rows.iter().map(|r| r.saturation).fold(0.0, f64::max);
        Ok(Outcome {
            inputs: json!({ "configurations": rows.len() }),
            outputs: json!({ "violations": violations, "max_saturation": max_sat, "bound": rows[0].bound }),
            pass: violations == 0,
            tolerance: 0.0,
            summary: format!("{violations} violations, max estimate/bound = {}", short(max_sat)),
        })
    });

    r.check("barycenter.k_identity", || {
        let (p, q) = setup.clone()?;
        let c = random_configuration(p, 3, b.radius.min(1.5), seed.wrapping_add(3))?;
        let pr = BarycenterProblem::new(p, &c, q)?;
        let sol = pr.solve(tol, max_iter)?;
        let forms = pr.form_pair_at(&sol.point)?;
        let n = p.total_dim;
        let kf = (p.k() as f64).sqrt();
        let h = 1e-3;
        let mut worst_fd: f64 = 0.0;
        let mut worst_identity: f64 = 0.0;
        for i in 0..p.k() {
            let (off, m) = (p.offset(i), p.dims[i]);
            let id_minus_h = DMatrix::identity(m, m) - &forms.factor_h[i];
            worst_identity = worst_identity.max((&forms.factor_k[i] - &id_minus_h).amax());
            // second differences of the functional inside factor i, rescaled to the factor frame
            let at = |a: usize, sa: f64, c: usize, sc: f64| -> Result<f64, Failure> {
                let mut e = DVector::zeros(n);
                e[off + a] += sa * h;
                e[off + c] += sc * h;
                Ok(pr.value(&sol.point.retract(p, &e)?)?)
            };
            for a in 0..m {
                for cc in 0..m {
                    let fd = (at(a, 1.0, cc, 1.0)? - at(a, 1.0, cc, -1.0)? - at(a, -1.0, cc, 1.0)?
                        + at(a, -1.0, cc, -1.0)?)
                        / (4.0 * h * h);
                    worst_fd = worst_fd.max((fd * p.alphas[i] * kf - id_minus_h[(a, cc)]).abs());
                }
            }
        }
        Ok(Outcome {
            inputs: json!({ "atoms": 3, "fd_step": h }),
            outputs: json!({ "max_fd_hessian_error": worst_fd, "max_k_identity_error": worst_identity }),
            pass: worst_fd <= b.k_identity_tol && worst_identity <= b.k_identity_tol,
            tolerance: b.k_identity_tol,
            summary: format!("FD Hessian vs Id - H_i: {worst_fd:.2e}"),
        })
    });

    r.check("barycenter.symmetric_saturation", || {
        let (p, q) = setup.clone()?;
        let atom = random_configuration(p, 1, b.radius, seed.wrapping_add(4))?.points()[0].clone();
        let pr = BarycenterProblem::new(p, &WeightedConfiguration::single(atom.clone()), q)?;
        let forms = pr.form_pair_at(&atom)?;
        let isotropy = forms
            .factor_h
            .iter()
            .map(|h| (h - DMatrix::identity(h.nrows(), h.nrows()).scale(1.0 / h.nrows() as f64)).amax())
            .fold(0.0, f64::max);
        let rep = pr.jacobian_bound_report(tol, max_iter)?;
        let gap = (rep.saturation - 1.0).abs();
        Ok(Outcome {
            inputs: base.clone(),
            outputs: json!({ "estimate": rep.estimate, "bound": rep.bound, "saturation": rep.saturation,
                             "max_isotropy_error": isotropy }),
            pass: gap <= b.saturation_tol && rep.holds,
            tolerance: b.saturation_tol,
            summary: format!("estimate/bound = {} (bound {})", short(rep.saturation), short(rep.bound)),
        })
    });

    let mut table =
        Table::new("jacobian", &["configuration", "atoms", "trace_error", "estimate", "bound", "saturation", "holds"]);
    for (k, row) in rows.iter().flatten().enumerate() {
        table.push(vec![
            k.to_string(),
            row.atoms.to_string(),
            row.trace_error.to_string(),
            row.estimate.to_string(),
            row.bound.to_string(),
            row.saturation.to_string(),
            row.holds.to_string(),
        ]);
    }
    r.table(table);
}
