#![allow(clippy::needless_range_loop)]

use std::f64::consts::SQRT_2;

use entlab_core::hyperbolic::{self, HyperboloidPoint, IdealPoint};
use entlab_core::product::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(m: usize, scale: f64, rng: &mut ChaCha8Rng) -> HyperboloidPoint {
    let s: Vec<f64> = (0..m).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect();
    HyperboloidPoint::from_spatial(&s)
}

fn random_product(dims: &[usize], rng: &mut ChaCha8Rng) -> ProductPoint {
    ProductPoint::new(dims.iter().map(|&m| random_point(m, 2.0, rng)).collect()).unwrap()
}

fn random_boundary(dims: &[usize], rng: &mut ChaCha8Rng) -> FurstenbergPoint {
    FurstenbergPoint::new(
        dims.iter()
            .map(|&m| {
                let d: Vec<f64> = (0..m).map(|_| rng.random::<f64>() - 0.5).collect();
                IdealPoint::from_direction(&d).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

/// Slope of the least-squares line through `(x, y)`.
fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn profile_matches_the_closed_form() {
    let cases: [(&[usize], &[f64]); 4] =
        [(&[3, 3], &[2.0, 2.0]), (&[3, 4], &[2.0, 3.0]), (&[3, 5, 4], &[2.0, 4.0, 3.0]), (&[4], &[3.0])];
    for (dims, hs) in cases {
        let p = min_entropy_profile(dims, hs).unwrap();
        let n: usize = dims.iter().sum();
        let nf = n as f64;
        let prod: f64 = dims.iter().zip(hs).map(|(&m, h)| ((m as f64).sqrt() / h).powf(m as f64 / nf)).product();
        for (i, (&m, h)) in dims.iter().zip(hs).enumerate() {
            assert!((p.alphas[i] - h / (m as f64).sqrt() * prod).abs() < 1e-12);
        }
        assert!((p.h_min - nf.sqrt() / prod).abs() < 1e-12);
        assert!((p.gm_factor - p.h_min * p.h_min / (4.0 * nf)).abs() < 1e-12);
        // exact identities behind the normalization
        let log_vol: f64 = dims.iter().zip(&p.alphas).map(|(&m, a)| m as f64 * a.ln()).sum();
        assert!(log_vol.abs() < 1e-12);
        assert!((p.entropy_norm_sq() - p.h_min * p.h_min).abs() < 1e-12);
        let squares: f64 = dims.iter().map(|&m| (m * m) as f64).sum();
        assert!((p.weighted_entropy_ratio() - squares / (nf * nf)).abs() < 1e-12);
    }
    let p = min_entropy_profile(&[3, 4], &[2.0, 3.0]).unwrap();
    assert!((p.h_min - 3.5476).abs() < 5e-4);
}

#[test]
fn rescaling_entropies_rescales_h_min() {
    let base = min_entropy_profile(&[3, 4], &[2.0, 3.0]).unwrap();
    for lambda in [0.5, 2.0] {
        let p = min_entropy_profile(&[3, 4], &[2.0 * lambda, 3.0 * lambda]).unwrap();
        assert!((p.h_min - lambda * base.h_min).abs() < 1e-12);
        assert!((p.alphas[0] / p.alphas[1] - base.alphas[0] / base.alphas[1]).abs() < 1e-12);
        assert!((p.alphas[0] - base.alphas[0]).abs() < 1e-12);
    }
}

#[test]
fn product_distance_is_a_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dims = [3, 4];
    let alphas = min_entropy_profile(&dims, &[2.0, 3.0]).unwrap().alphas;
    for _ in 0..500 {
        let p: Vec<ProductPoint> = (0..3).map(|_| random_product(&dims, &mut rng)).collect();
        let d = |a: usize, b: usize| product_dist(&p[a], &p[b], &alphas).unwrap();
        assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
        assert_eq!(d(0, 0), 0.0);
    }
}

#[test]
fn product_busemann_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for dims in [vec![3, 3], vec![3, 4], vec![3, 3, 5]] {
        let profile = ScalingProfile::real_hyperbolic(&dims).unwrap();
        let k = dims.len() as f64;
        for _ in 0..1000 / 3 {
            let x = random_product(&dims, &mut rng);
            let theta = random_boundary(&dims, &mut rng);
            let b = product_busemann(&x, &theta, &profile).unwrap();
            assert!((b.gradient.norm() - 1.0).abs() < 1e-9);
            let mut value = 0.0;
            for i in 0..dims.len() {
                let f = hyperbolic::busemann(x.factor(i), &theta.factors()[i]).unwrap();
                value += profile.alphas[i] / k.sqrt() * f.value;
                let u = &f.frame_gradient;
                let m = dims[i];
                let expected =
                    (DMatrix::identity(m, m) - u * u.transpose()).scale(1.0 / (profile.alphas[i] * k.sqrt()));
                let off = profile.offset(i);
                let block = b.hessian.view((off, off), (m, m)).into_owned();
                assert!((block - expected).amax() < 1e-6);
            }
            assert!((b.value - value).abs() < 1e-12);
        }
    }
    let profile = ScalingProfile::real_hyperbolic(&[3, 3]).unwrap();
    let x = random_product(&[3, 3], &mut rng);
    let theta = random_boundary(&[3, 3], &mut rng);
    let b = product_busemann(&x, &theta, &profile).unwrap();
    assert!((b.value - (b.factors[0].value + b.factors[1].value) / SQRT_2).abs() < 1e-12);
}

#[test]
fn single_h3_growth_matches_the_closed_form() {
    let g = entropy_growth_numeric(&[3], 10.0, 20.0, 0.05).unwrap();
    assert!((g.slope - 2.0).abs() <= 0.02);
    // the ball volume of H^3 is pi (sinh 2 rho - 2 rho); compare log V up to the sphere constant
    let exact: Vec<f64> = g.radii.iter().map(|&r| (std::f64::consts::PI * ((2.0 * r).sinh() - 2.0 * r)).ln()).collect();
    let oracle = ls_slope(&g.radii, &exact);
    assert!((g.slope - oracle).abs() < 1e-4, "{} vs {oracle}", g.slope);
    let offset = exact[0] - g.log_volumes[0];
    for (e, v) in exact.iter().zip(&g.log_volumes) {
        assert!((e - v - offset).abs() < 1e-4);
    }
}

#[test]
fn two_factor_growth() {
    let g = entropy_growth_numeric(&[3, 3], 8.0, 16.0, 0.05).unwrap();
    assert!((g.slope - 2.0 * SQRT_2).abs() <= 0.06, "slope {}", g.slope);
    let g = entropy_growth_numeric(&[3, 4], 8.0, 16.0, 0.05).unwrap();
    assert!((g.slope - 13f64.sqrt()).abs() <= 0.08, "slope {}", g.slope);
    assert!(matches!(g.method, GrowthMethod::Nested));
}

#[test]
fn growth_increases_with_factor_entropy() {
    let slopes: Vec<f64> =
        [[3, 3], [3, 4], [4, 4]].iter().map(|d| entropy_growth_numeric(d, 8.0, 16.0, 0.05).unwrap().slope).collect();
    assert!(slopes[0] <= slopes[1] && slopes[1] <= slopes[2], "{slopes:?}");
}

#[test]
fn scaled_growth_recovers_h_min() {
    let p = min_entropy_profile(&[3, 4], &[2.0, 3.0]).unwrap();
    let g = entropy_growth_scaled(&p, 8.0, 16.0, 0.05, 1).unwrap();
    assert!((g.slope - p.h_min).abs() <= 0.08, "{} vs {}", g.slope, p.h_min);
}

#[test]
fn three_factor_growth_by_monte_carlo() {
    let a = entropy_growth_seeded(&[3, 3, 3], 8.0, 16.0, 0.05, 42).unwrap();
    let b = entropy_growth_seeded(&[3, 3, 3], 8.0, 16.0, 0.05, 42).unwrap();
    assert_eq!(a, b);
    let target = 2.0 * 3f64.sqrt();
    assert!((a.slope - target).abs() <= 0.1 + 3.0 * a.slope_err, "{} vs {target}", a.slope);
    assert!(matches!(a.method, GrowthMethod::MonteCarlo { seed: 42, .. }));
}
