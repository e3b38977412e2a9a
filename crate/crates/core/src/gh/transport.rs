use serde::Serialize;

use super::space::FiniteMetricSpace;
use crate::error::{Error, Result};

const MASS_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureDiscrepancy {
    /// Cost of the optimal transport plan (an upper bound).
    pub discrepancy: f64,
    /// `sum (mu - nu) phi` for the 1-Lipschitz witness `phi` (a lower bound).
    pub dual_bound: f64,
    pub gap: f64,
    pub witness: Vec<f64>,
}

/// `sup { sum phi d(mu - nu) : phi 1-Lipschitz on Y }`, where `mu` is the
/// weight of `X` pushed to `Y` by `map` (the identity when `None`) and `nu` is
/// the weight of `Y`.
///
/// By duality this is the transport cost of moving the excess of `mu` over
/// `nu` onto its deficit. The primal plan comes from successive shortest
/// paths; its final potentials give the witness `phi`, so the reported
/// `gap` certifies the value.
pub fn measure_compare(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    map: Option<&[usize]>,
) -> Result<MeasureDiscrepancy> {
    let mut mu = vec![0.0; y.len()];
    match map {
        None => {
            if x.len() != y.len() {
                return Err(Error::DimensionMismatch { expected: y.len(), got: x.len() });
            }
            mu.copy_from_slice(x.weights());
        }
        Some(m) => {
            if m.len() != x.len() {
                return Err(Error::DimensionMismatch { expected: x.len(), got: m.len() });
            }
            for (k, &img) in m.iter().enumerate() {
                if img >= y.len() {
                    return Err(Error::InvalidArgument(format!("map({k}) = {img} is outside Y")));
                }
                mu[img] += x.weights()[k];
            }
        }
    }
    let excess: Vec<f64> = mu.iter().zip(y.weights()).map(|(a, b)| a - b).collect();
    let sources: Vec<usize> = (0..y.len()).filter(|&k| excess[k] > MASS_TOL).collect();
    let sinks: Vec<usize> = (0..y.len()).filter(|&k| excess[k] < -MASS_TOL).collect();
    let mut supply: Vec<f64> = sources.iter().map(|&k| excess[k]).collect();
    let mut demand: Vec<f64> = sinks.iter().map(|&k| -excess[k]).collect();
    let (ns, nt) = (sources.len(), sinks.len());
    let cost = |i: usize, j: usize| y.d(sources[i], sinks[j]);
    let mut flow = vec![0.0; ns * nt];
    let mut ps = vec![0.0; ns];
    let mut pt = vec![0.0; nt];

    // Nodes 0..ns are sources, ns..ns+nt sinks.
    loop {
        let open = supply.iter().any(|&s| s > MASS_TOL) && demand.iter().any(|&t| t > MASS_TOL);
        if !open {
            break;
        }
        let total = ns + nt;
        let mut dist = vec![f64::INFINITY; total];
        let mut pred = vec![usize::MAX; total];
        let mut done = vec![false; total];
        for i in 0..ns {
            if supply[i] > MASS_TOL {
                dist[i] = 0.0;
            }
        }
        let mut target = None;
        while let Some(v) =
            (0..total).filter(|&v| !done[v] && dist[v].is_finite()).min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
        {
            done[v] = true;
            if v >= ns && demand[v - ns] > MASS_TOL {
                target = Some(v);
                break;
            }
            if v < ns {
                for j in 0..nt {
                    let r = (cost(v, j) + ps[v] - pt[j]).max(0.0);
                    if dist[v] + r < dist[ns + j] {
                        dist[ns + j] = dist[v] + r;
                        pred[ns + j] = v;
                    }
                }
            } else {
                let j = v - ns;
                for i in 0..ns {
                    if flow[i * nt + j] > MASS_TOL {
                        let r = (-cost(i, j) + pt[j] - ps[i]).max(0.0);
                        if dist[v] + r < dist[i] {
                            dist[i] = dist[v] + r;
                            pred[i] = v;
                        }
                    }
                }
            }
        }
        let Some(t) = target else {
            return Err(Error::Singular("transport residual graph has no augmenting path".into()));
        };
        let cap = dist[t];
        for i in 0..ns {
            ps[i] += dist[i].min(cap);
        }
        for j in 0..nt {
            pt[j] += dist[ns + j].min(cap);
        }
        // walk back to the source that starts the path
        let mut amount = demand[t - ns];
        let mut v = t;
        while pred[v] != usize::MAX {
            let u = pred[v];
            if u >= ns {
                amount = amount.min(flow[v * nt + (u - ns)]);
            }
            v = u;
        }
        amount = amount.min(supply[v]);
        supply[v] -= amount;
        demand[t - ns] -= amount;
        let mut v = t;
        while pred[v] != usize::MAX {
            let u = pred[v];
            if u < ns {
                flow[u * nt + (v - ns)] += amount;
            } else {
                flow[v * nt + (u - ns)] -= amount;
            }
            v = u;
        }
    }

    let mut primal = 0.0;
    for i in 0..ns {
        for j in 0..nt {
            primal += flow[i * nt + j].max(0.0) * cost(i, j);
        }
    }
    // c-transform of the sink potentials: a minimum of 1-Lipschitz functions
    let witness: Vec<f64> = (0..y.len())
        .map(|k| (0..nt).map(|j| y.d(k, sinks[j]) - pt[j]).fold(f64::INFINITY, f64::min))
        .map(|v| if v.is_finite() { v } else { 0.0 })
        .collect();
    let dual: f64 = excess.iter().zip(&witness).map(|(e, w)| e * w).sum();
    Ok(MeasureDiscrepancy { discrepancy: primal, dual_bound: dual, gap: (primal - dual).max(0.0), witness })
}
