#![allow(clippy::needless_range_loop)]

use std::f64::consts::TAU;

use entlab_core::gh::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space(rows: Vec<Vec<f64>>) -> FiniteMetricSpace {
    FiniteMetricSpace::new(rows, None).unwrap()
}

/// Random Euclidean points in the plane, so the triangle inequality holds.
fn random_planar(n: usize, rng: &mut ChaCha8Rng) -> FiniteMetricSpace {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    FiniteMetricSpace::from_metric(n, |i, j| (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1)).unwrap()
}

/// Minimum over every relation `R` in `X x Y` that covers both sides.
fn brute_force_gh(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    let (nx, ny) = (x.len(), y.len());
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << (nx * ny)) {
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

#[test]
fn circle_nets_match_packing_and_covering_counts() {
    let eps = 0.2;
    let arc = 2.0 * (0.5f64 * eps).asin();
    let sparse = FiniteMetricSpace::circle(100, CircleMetric::Chord).unwrap();
    let net = greedy_net(&sparse, eps).unwrap();
    // separated nets have at most TAU / arc points, covering ones at least TAU / (2 arc)
    assert!(net.len() as f64 <= TAU / arc && net.len() as f64 >= TAU / (2.0 * arc));
    assert_eq!(net.len(), 25);
    let dense = FiniteMetricSpace::circle(1000, CircleMetric::Chord).unwrap();
    let net = greedy_net(&dense, eps).unwrap();
    assert!((28..=34).contains(&net.len()), "{}", net.len());
}

#[test]
fn nets_are_separated_and_covering() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..20 {
        let x = random_planar(60, &mut rng);
        let eps = 0.05 + 0.3 * trial as f64 / 20.0;
        let net = greedy_net(&x, eps).unwrap();
        for (k, &a) in net.iter().enumerate() {
            for &b in &net[k + 1..] {
                assert!(x.d(a, b) >= eps);
            }
        }
        assert!(covering_radius(&x, &net) < eps);
    }
}

#[test]
fn graph_metric_agrees_with_floyd_warshall() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let t = random_planar(40, &mut rng);
        let all: Vec<usize> = (0..40).collect();
        let eps = 0.35;
        let g = build_net_graph(&all, &all, &t, eps, 0.9 * delta_bound(eps, &t), 10).unwrap();
        let gm = graph_metric(&g);
        let n = 40;
        let mut fw = vec![f64::INFINITY; n * n];
        for i in 0..n {
            fw[i * n + i] = 0.0;
        }
        for e in &g.edges {
            fw[e.a * n + e.b] = e.length;
            fw[e.b * n + e.a] = e.length;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = fw[i * n + k] + fw[k * n + j];
                    if via < fw[i * n + j] {
                        fw[i * n + j] = via;
                    }
                }
            }
        }
        for (a, b) in gm.dist.iter().zip(&fw) {
            assert!(a == b || (a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn triangle_graph() {
    let t = space(vec![vec![0.0, 3.0, 5.0], vec![3.0, 0.0, 4.0], vec![5.0, 4.0, 0.0]]);
    let g = build_net_graph(&[0, 1, 2], &[0, 1, 2], &t, 6.0, 0.1, 3).unwrap();
    assert_eq!(graph_metric(&g).d(0, 2), 5.0);
    let half = space(vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
    let g = build_net_graph(&[0, 1], &[0, 1], &half, 1.0, 0.01, 3).unwrap();
    assert_eq!(g.edges.len(), 1);
    assert_eq!(g.edges[0].length, 0.5);
}

#[test]
fn approximation_holds_on_the_circle() {
    let t = FiniteMetricSpace::circle(1000, CircleMetric::Arc).unwrap();
    let eps = 0.3;
    let delta = 0.9 * delta_bound(eps, &t);
    let ident: Vec<usize> = (0..t.len()).collect();
    for net_radius in [delta, eps / 4.0] {
        let net = greedy_net(&t, net_radius).unwrap();
        let g = build_net_graph(&net, &ident, &t, eps, delta, 8).unwrap();
        assert!(g.interval_violations(&t).is_empty());
        let r = approximation_check(&g, &t, eps);
        assert!(r.pass, "{r:?}");
        assert!(r.upper_excess <= eps && r.lower_excess <= eps);
    }
}

#[test]
fn approximation_holds_on_the_flat_torus() {
    let t = FiniteMetricSpace::flat_torus(24).unwrap();
    let eps = 0.3;
    let delta = 0.9 * delta_bound(eps, &t);
    let ident: Vec<usize> = (0..t.len()).collect();
    let net = greedy_net(&t, delta).unwrap();
    let g = build_net_graph(&net, &ident, &t, eps, delta, 8).unwrap();
    assert!(!g.edges.is_empty());
    for e in &g.edges {
        let d = t.d(g.images[e.a], g.images[e.b]);
        let (lo, hi) = g.length_interval(d);
        assert!(e.length > lo && e.length < hi);
    }
    let r = approximation_check(&g, &t, eps);
    assert!(r.pass, "{r:?}");
}

#[test]
fn approximation_is_exact_on_trees_and_on_full_graphs() {
    let t = FiniteMetricSpace::random_tree(60, 0.1, 5).unwrap();
    let eps = 0.25;
    let all: Vec<usize> = (0..60).collect();
    let g = build_net_graph(&all, &all, &t, eps, 0.9 * delta_bound(eps, &t), 4).unwrap();
    let r = approximation_check(&g, &t, eps);
    assert!(r.pass && r.max_deviation <= 1e-12, "{r:?}");
    // dyadic distances keep path sums exact
    let line = FiniteMetricSpace::from_metric(12, |i, j| 0.25 * (i as f64 - j as f64).abs()).unwrap();
    let all: Vec<usize> = (0..12).collect();
    let g = build_net_graph(&all, &all, &line, 4.0, 0.9 * delta_bound(4.0, &line), 4).unwrap();
    assert_eq!(approximation_check(&g, &line, 4.0).max_deviation, 0.0);
}

#[test]
fn inflated_edge_is_caught() {
    let t = FiniteMetricSpace::circle(200, CircleMetric::Arc).unwrap();
    let eps = 0.3;
    let delta = 0.9 * delta_bound(eps, &t);
    let all: Vec<usize> = (0..200).collect();
    let mut g = build_net_graph(&all, &all, &t, eps, delta, 8).unwrap();
    assert!(approximation_check(&g, &t, eps).pass);
    g.edges[7].length += 2.0 * delta;
    assert_eq!(g.interval_violations(&t), vec![7]);
    assert!(!approximation_check(&g, &t, eps).pass);
}

#[test]
fn gh_bounds_match_brute_force_on_small_spaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut cases = 0;
    for nx in 2..=4 {
        for ny in 2..=4 {
            for _ in 0..4 {
                let x = random_planar(nx, &mut rng);
                let y = random_planar(ny, &mut rng);
                let b = gh_bounds(&x, &y);
                let oracle = brute_force_gh(&x, &y);
                assert!(b.exact);
                assert!((b.upper - oracle).abs() <= 1e-12, "{} vs {oracle}", b.upper);
                assert!(b.lower <= b.upper + 1e-12);
                let c = Correspondence::new(b.correspondence.pairs.clone(), nx, ny).unwrap();
                assert!((0.5 * c.distortion(&x, &y) - b.upper).abs() <= 1e-12);
                cases += 1;
            }
        }
    }
    assert_eq!(cases, 36);
}

#[test]
fn gh_examples() {
    let a = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    let b = space(vec![vec![0.0, 3.0], vec![3.0, 0.0]]);
    let r = gh_bounds(&a, &b);
    assert_eq!((r.lower, r.upper), (1.0, 1.0));

    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let x = random_planar(7, &mut rng);
    let same = gh_bounds(&x, &x);
    assert_eq!((same.lower, same.upper), (0.0, 0.0));

    // a relabeled copy is isometric
    let perm = [3, 0, 6, 1, 5, 2, 4];
    let y = FiniteMetricSpace::from_metric(7, |i, j| x.d(perm[i], perm[j])).unwrap();
    let r = gh_bounds(&x, &y);
    assert_eq!((r.lower, r.upper), (0.0, 0.0));

    // one extra point within r of the rest
    let pts: [(f64, f64); 5] = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.1, 0.95)];
    let big = FiniteMetricSpace::from_metric(5, |i, j| (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1)).unwrap();
    let sub = big.subspace(&[0, 1, 2, 3]).unwrap();
    let r_extra = big.d(3, 4);
    assert!(gh_bounds(&sub, &big).upper <= r_extra);
}

#[test]
fn large_spaces_get_a_labelled_heuristic_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let x = random_planar(15, &mut rng);
    let y = random_planar(12, &mut rng);
    let b = gh_bounds(&x, &y);
    assert!(!b.exact);
    assert!(b.lower <= b.upper);
    let c = Correspondence::new(b.correspondence.pairs.clone(), 15, 12).unwrap();
    assert_eq!(0.5 * c.distortion(&x, &y), b.upper);
}

#[test]
fn epsilon_isometries() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let x = random_planar(20, &mut rng);
    let id: Vec<usize> = (0..20).collect();
    let r = epsilon_isometry_check(&id, &x, &x, 0.0).unwrap();
    assert!(r.pass && r.distortion == 0.0);

    // scaling by (1 + s) perturbs every distance by less than s diam
    let delta = 0.01;
    let s = 0.99 * delta / x.diameter();
    let y = FiniteMetricSpace::from_metric(20, |i, j| (1.0 + s) * x.d(i, j)).unwrap();
    assert!(epsilon_isometry_check(&id, &x, &y, delta).unwrap().pass);

    let mut collapse = id.clone();
    let far = (1..20).max_by(|&a, &b| x.d(0, a).total_cmp(&x.d(0, b))).unwrap();
    collapse[far] = 0;
    let r = epsilon_isometry_check(&collapse, &x, &x, 0.05).unwrap();
    assert!(!r.pass);
    assert!(r.worst_pair.is_some());
}

/// W1 on a weighted tree: sum over edges of length times the net mass below it.
fn tree_w1(parent: &[usize], len: &[f64], excess: &[f64]) -> f64 {
    let n = parent.len();
    let mut below = excess.to_vec();
    let mut total = 0.0;
    for v in (1..n).rev() {
        total += len[v] * below[v].abs();
        below[parent[v]] += below[v];
    }
    total
}

#[test]
fn transport_matches_the_tree_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..25 {
        let n = rng.random_range(3..12);
        let parent: Vec<usize> = (0..n).map(|v| if v == 0 { 0 } else { rng.random_range(0..v) }).collect();
        let len: Vec<f64> = (0..n).map(|_| 0.1 + rng.random::<f64>()).collect();
        let mut depth = vec![vec![0.0; n]; n];
        for v in 1..n {
            for u in 0..v {
                depth[v][u] = depth[parent[v]][u] + len[v];
                depth[u][v] = depth[v][u];
            }
        }
        let t = FiniteMetricSpace::from_metric(n, |i, j| depth[i][j]).unwrap();
        let draw = |rng: &mut ChaCha8Rng| {
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect::<Vec<f64>>()
        };
        let (mu, nu) = (draw(&mut rng), draw(&mut rng));
        let a = t.with_weights(mu.clone()).unwrap();
        let b = t.with_weights(nu.clone()).unwrap();
        let m = measure_compare(&a, &b, None).unwrap();
        let excess: Vec<f64> = mu.iter().zip(&nu).map(|(p, q)| p - q).collect();
        let oracle = tree_w1(&parent, &len, &excess);
        assert!((m.discrepancy - oracle).abs() < 1e-12, "{} vs {oracle}", m.discrepancy);
        assert!(m.gap < 1e-12);
        for i in 0..n {
            for j in 0..n {
                assert!((m.witness[i] - m.witness[j]).abs() <= t.d(i, j) + 1e-12);
            }
        }
    }
}

#[test]
fn transport_examples() {
    let s = 1.7;
    let tri = space(vec![vec![0.0, s, s], vec![s, 0.0, s], vec![s, s, 0.0]]);
    let point = tri.with_weights(vec![1.0, 0.0, 0.0]).unwrap();
    let m = measure_compare(&tri, &point, None).unwrap();
    assert!((m.discrepancy - 2.0 / 3.0 * s).abs() < 1e-15);

    // pushing forward through a map
    let two = space(vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
    let m = measure_compare(&tri, &two, Some(&[0, 0, 1])).unwrap();
    assert!((m.discrepancy - (2.0 / 3.0 - 0.5) * 2.0).abs() < 1e-15);
    assert!(measure_compare(&tri, &two, None).is_err());
}

#[test]
fn transport_is_symmetric_and_satisfies_the_triangle_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let base = random_planar(9, &mut rng);
    let draw = |rng: &mut ChaCha8Rng| {
        let w: Vec<f64> = (0..9).map(|_| rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        base.with_weights(w.into_iter().map(|x| x / s).collect()).unwrap()
    };
    for _ in 0..20 {
        let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let ab = measure_compare(&a, &b, None).unwrap().discrepancy;
        let ba = measure_compare(&b, &a, None).unwrap().discrepancy;
        let bc = measure_compare(&b, &c, None).unwrap().discrepancy;
        let ac = measure_compare(&a, &c, None).unwrap().discrepancy;
        assert!((ab - ba).abs() < 1e-12);
        assert!(ac <= ab + bc + 1e-12);
    }
}
