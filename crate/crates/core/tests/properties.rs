//! Randomized invariants across the library.

use entlab_core::barycenter::bcg_inequality_check;
use entlab_core::gh::*;
use entlab_core::hyperbolic::{self, busemann, HyperboloidPoint, IdealPoint};
use entlab_core::product::{min_entropy_profile, product_dist, ProductPoint};
use entlab_core::shortcut::{d_eta_reduced, ShortcutModel};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn spatial(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, m)
}

fn direction(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, m).prop_filter("nonzero", |d| d.iter().map(|x| x * x).sum::<f64>() > 1e-4)
}

fn planar_space(max: usize) -> impl Strategy<Value = FiniteMetricSpace> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..=max).prop_map(|pts| {
        FiniteMetricSpace::from_metric(pts.len(), |i, j| (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1)).unwrap()
    })
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hyperbolic_triangle_inequality(a in spatial(3), b in spatial(3), c in spatial(3)) {
        let (x, y, z) = (HyperboloidPoint::from_spatial(&a), HyperboloidPoint::from_spatial(&b), HyperboloidPoint::from_spatial(&c));
        let d = |p: &HyperboloidPoint, q: &HyperboloidPoint| hyperbolic::dist(p, q).unwrap();
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        prop_assert_eq!(d(&x, &y), d(&y, &x));
    }

    #[test]
    fn busemann_gradient_is_unit_and_hessian_is_a_projection(a in spatial(4), dir in direction(4)) {
        let x = HyperboloidPoint::from_spatial(&a);
        let xi = IdealPoint::from_direction(&dir).unwrap();
        let b = busemann(&x, &xi).unwrap();
        prop_assert!((b.gradient.norm() - 1.0).abs() < 1e-10);
        // Id - u u^T annihilates u and fixes its complement
        let hu: DVector<f64> = &b.hessian * &b.frame_gradient;
        prop_assert!(hu.amax() < 1e-10);
        prop_assert!((b.hessian.trace() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn scaling_profile_identities(
        dims in prop::collection::vec(3usize..8, 1..5),
        raw in prop::collection::vec(0.5f64..6.0, 4),
    ) {
        let hs: Vec<f64> = raw[..dims.len()].to_vec();
        let p = min_entropy_profile(&dims, &hs).unwrap();
        let log_vol: f64 = dims.iter().zip(&p.alphas).map(|(&m, a)| m as f64 * a.ln()).sum();
        prop_assert!(log_vol.abs() < 1e-11);
        prop_assert!((p.entropy_norm_sq() / (p.h_min * p.h_min) - 1.0).abs() < 1e-12);
        let n = p.total_dim as f64;
        prop_assert!((p.gm_factor - p.h_min * p.h_min / (4.0 * n)).abs() < 1e-12 * p.gm_factor.max(1.0));
    }

    #[test]
    fn product_distance_triangle(a in spatial(7), b in spatial(7), c in spatial(7)) {
        let split = |v: &[f64]| ProductPoint::new(vec![
            HyperboloidPoint::from_spatial(&v[..3]),
            HyperboloidPoint::from_spatial(&v[3..]),
        ]).unwrap();
        let alphas = min_entropy_profile(&[3, 4], &[2.0, 3.0]).unwrap().alphas;
        let (x, y, z) = (split(&a), split(&b), split(&c));
        let d = |p: &ProductPoint, q: &ProductPoint| product_dist(p, q, &alphas).unwrap();
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
    }

    #[test]
    fn bcg_inequality_on_random_spectra(raw in prop::collection::vec(0.0f64..1.0, 3..7), angle in 0.0f64..6.3) {
        let n = raw.len();
        let s: f64 = raw.iter().sum::<f64>() + 1e-9;
        let spectrum: Vec<f64> = raw.iter().map(|x| (x + 1e-9 / n as f64) / s).collect();
        prop_assume!(spectrum.iter().all(|&l| l < 1.0 - 1e-9));
        // rotate in the (0, 1) plane so H is not diagonal
        let mut r = DMatrix::<f64>::identity(n, n);
        r[(0, 0)] = angle.cos();
        r[(0, 1)] = -angle.sin();
        r[(1, 0)] = angle.sin();
        r[(1, 1)] = angle.cos();
        let h = &r * DMatrix::from_diagonal(&DVector::from_vec(spectrum)) * r.transpose();
        let h = (&h + h.transpose()).scale(0.5);
        let check = bcg_inequality_check(&h, n, n as f64 - 1.0).unwrap();
        prop_assert!(check.holds, "{check:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn shortcut_distance_is_symmetric_and_below_euclid(
        eta in 0.2f64..1.0,
        a in (0.0f64..6.0, 0.0f64..6.0),
        b in (0.0f64..6.0, 0.0f64..6.0),
    ) {
        let m = ShortcutModel::standard(3, eta, 0.05, 6.0).unwrap();
        let (p, q) = ([a.0, a.1], [b.0, b.1]);
        let d = d_eta_reduced(&m, p, q).unwrap();
        prop_assert_eq!(d, d_eta_reduced(&m, q, p).unwrap());
        let (u, v) = (m.coords(m.node(p).unwrap()), m.coords(m.node(q).unwrap()));
        let e = (u[0] - v[0]).hypot(u[1] - v[1]);
        prop_assert!(d <= e * 1.02 + 1e-12);
    }

    #[test]
    fn gh_bounds_are_ordered_and_vanish_on_relabelings(x in planar_space(6), y in planar_space(6), seed in 0u64..1000) {
        let b = gh_bounds(&x, &y);
        prop_assert!(b.lower <= b.upper + 1e-12);
        let n = x.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left((seed as usize) % n);
        perm.swap(0, n - 1);
        let z = FiniteMetricSpace::from_metric(n, |i, j| x.d(perm[i], perm[j])).unwrap();
        let same = gh_bounds(&x, &z);
        prop_assert_eq!((same.lower, same.upper), (0.0, 0.0));
    }

    #[test]
    fn nets_cover_and_separate(x in planar_space(40), eps in 0.02f64..0.8) {
        let net = greedy_net(&x, eps).unwrap();
        prop_assert!(covering_radius(&x, &net) < eps);
        for (k, &a) in net.iter().enumerate() {
            for &b in &net[k + 1..] {
                prop_assert!(x.d(a, b) >= eps);
            }
        }
    }

    #[test]
    fn transport_is_a_metric_on_measures(
        (base, ws) in planar_space(8).prop_flat_map(|x| {
            let n = x.len();
            (Just(x), prop::collection::vec(weights(n), 3))
        })
    ) {
        let sp: Vec<FiniteMetricSpace> = ws.into_iter().map(|w| base.with_weights(w).unwrap()).collect();
        let d = |a: usize, b: usize| measure_compare(&sp[a], &sp[b], None).unwrap();
        let ab = d(0, 1);
        prop_assert!(ab.gap < 1e-12);
        prop_assert!((ab.discrepancy - d(1, 0).discrepancy).abs() < 1e-12);
        prop_assert!(d(0, 2).discrepancy <= ab.discrepancy + d(1, 2).discrepancy + 1e-12);
        prop_assert!(d(0, 0).discrepancy == 0.0);
    }

    #[test]
    fn csv_round_trip(x in planar_space(9)) {
        let y = FiniteMetricSpace::from_csv(&x.to_csv()).unwrap();
        prop_assert_eq!(x, y);
    }
}
