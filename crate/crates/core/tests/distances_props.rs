use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI, SQRT_2};

use proptest::prelude::*;
use qmix::distances::*;

fn params(alpha: f64, theta: f64, p: f64) -> ReplacementChannelParams {
    ReplacementChannelParams::new(alpha, theta, p).unwrap()
}

#[test]
fn identical_channels_have_zero_distance() {
    for alpha in [-0.7, -0.1, 0.0, 0.3, FRAC_PI_4] {
        let d = diamond_distance_single(&params(alpha, alpha, 0.0));
        assert!(d < 1e-15, "{d}");
        let bf = brute_force_diamond_single(&params(alpha, alpha, 0.0), 4);
        assert!(bf.value < 1e-12);
    }
}

#[test]
fn full_deletion_is_chord_length() {
    for alpha in [-0.7, -0.1, 0.2, FRAC_PI_4] {
        for theta in [0.0, 0.5, -1.3] {
            let d = diamond_distance_single(&params(alpha, theta, 1.0));
            assert!((d - 2.0 * (alpha / 2.0).sin().abs()).abs() < 1e-14);
        }
        assert!((min_diamond_distance(alpha, 1.0) - 2.0 * (alpha / 2.0).sin().abs()).abs() < 1e-14);
        assert_eq!(min_diamond_distance(alpha, 0.0), 0.0);
    }
}

#[test]
fn radical_form_agrees() {
    for &(a, t, p) in &[(0.3, 0.35, 0.2), (FRAC_PI_8, FRAC_PI_8, 0.5), (-0.6, 0.1, 0.9), (0.01, 0.02, 0.5)] {
        let x = params(a, t, p);
        // the square root amplifies rounding near zero, so compare squares
        let (d, r) = (diamond_distance_single(&x), diamond_distance_single_radical(&x));
        assert!((d * d - r * r).abs() < 1e-12);
        assert!((d - r).abs() < 1e-7);
    }
}

#[test]
fn brute_force_examples() {
    let x = params(0.3, 0.35, 0.2);
    let bf = brute_force_diamond_single(&x, 32);
    assert!((bf.value - diamond_distance_single(&x)).abs() < 1e-6);
    assert!((bf.system_zero_weight - 0.5).abs() < 1e-3, "x = {}", bf.system_zero_weight);

    let x = params(FRAC_PI_8, FRAC_PI_8, 0.5);
    let bf = brute_force_diamond_single(&x, 32);
    assert!((bf.value - diamond_distance_single(&x)).abs() < 1e-6);
}

#[test]
fn optimal_theta_examples() {
    for alpha in [-0.7, -0.2, 0.1, 0.5, FRAC_PI_4] {
        assert!((optimal_theta(alpha, 0.0) - alpha).abs() < 1e-14);
    }
    assert_eq!(optimal_theta(0.0, 0.6), 0.0);

    let (alpha, p) = (FRAC_PI_8, 0.8);
    let t = optimal_theta(alpha, p);
    let n = 1_000_000;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..n {
        let theta = -PI + 2.0 * PI * k as f64 / n as f64;
        let d = diamond_distance_single(&params(alpha, theta, p));
        if d < best.0 {
            best = (d, theta);
        }
    }
    assert!((best.1 - t).abs() < 1e-5, "grid argmin {} vs {}", best.1, t);
    assert!(diamond_distance_single(&params(alpha, t, p)) <= best.0 + 1e-12);
}

#[test]
fn small_angle_limits() {
    let p = 0.5;
    for alpha in [1e-2, 3e-3, 1e-3] {
        let want = p * alpha * alpha / (2.0 * (1.0 - p));
        assert!((min_diamond_distance(alpha, p) - want).abs() < alpha.powi(4));
        assert!((optimal_theta(alpha, p) - alpha / (1.0 - p)).abs() < alpha.powi(3));
    }
}

#[test]
fn typical_constants() {
    assert!((FROBENIUS_RATIO - 0.5554).abs() < 1e-4);
    assert!((TRACE_RATIO - 0.7854).abs() < 1e-4);
    assert!((AVG_CASE_RATIO - 1.0 / (2.0 * SQRT_2)).abs() < 1e-15);
    let x = params(0.4, 0.9, 0.6);
    let d = diamond_distance_single(&x);
    assert!((frobenius_avg_single(&x) / d - FROBENIUS_RATIO).abs() < 1e-14);
    assert!((trace_avg_single(&x) / d - TRACE_RATIO).abs() < 1e-14);
    assert!((avg_case_single(&x) / d - AVG_CASE_RATIO).abs() < 1e-14);
    let zero = params(0.3, 0.3, 0.0);
    assert_eq!(frobenius_avg_single(&zero), 0.0);
    assert_eq!(trace_avg_single(&zero), 0.0);
    assert_eq!(avg_case_single(&zero), 0.0);
}

#[test]
fn haar_sampler() {
    let zero = params(0.3, 0.3, 0.0);
    let (m, e) = haar_frobenius_mc_single(&zero, 1000, 1).unwrap();
    assert!(m < 1e-15 && e < 1e-15);
    assert!(haar_frobenius_mc_single(&zero, 0, 1).is_err());

    let x = ReplacementChannelParams::optimal(0.3, 0.5).unwrap();
    let (m, e) = haar_frobenius_mc_single(&x, 200_000, 9).unwrap();
    assert!((m - frobenius_avg_single(&x)).abs() < 4.0 * e, "{m} ± {e}");
    let (m, e) = sqrt_a_one_minus_a_mc(200_000, 5);
    assert!((m - PI / 8.0).abs() < 4.0 * e);
}

#[test]
fn params_validation() {
    assert!(ReplacementChannelParams::new(0.1, 0.1, 1.5).is_err());
    assert!(ReplacementChannelParams::new(f64::NAN, 0.1, 0.5).is_err());
    assert!(ReplacementChannelParams::new(0.1, f64::INFINITY, 0.5).is_err());
}

proptest! {
    #[test]
    fn radical_squares_agree(alpha in -FRAC_PI_4..FRAC_PI_4, theta in -PI..PI, p in 0.0f64..=1.0) {
        let x = params(alpha, theta, p);
        let (d, r) = (diamond_distance_single(&x), diamond_distance_single_radical(&x));
        prop_assert!((d * d - r * r).abs() < 1e-12);
    }

    #[test]
    fn sign_symmetry(alpha in -FRAC_PI_4..FRAC_PI_4, theta in -PI..PI, p in 0.0f64..=1.0) {
        let a = diamond_distance_single(&params(alpha, theta, p));
        let b = diamond_distance_single(&params(-alpha, -theta, p));
        prop_assert!((a - b).abs() < 1e-14);
        prop_assert!((optimal_theta(alpha, p.min(0.99)) + optimal_theta(-alpha, p.min(0.99))).abs() < 1e-12);
    }

    #[test]
    fn minimum_is_attained(alpha in -FRAC_PI_4..FRAC_PI_4, p in 0.0f64..0.99) {
        let t = optimal_theta(alpha, p);
        let at = diamond_distance_single(&params(alpha, t, p));
        prop_assert!((at - min_diamond_distance(alpha, p)).abs() < 1e-10);
        let (m, r) = (min_diamond_distance(alpha, p), min_diamond_distance_radical(alpha, p));
        prop_assert!((m * m - r * r).abs() < 1e-12);
        for dt in [-1e-3, 1e-3, -0.1, 0.1, 1.0] {
            prop_assert!(diamond_distance_single(&params(alpha, t + dt, p)) >= at - 1e-15);
        }
    }

    #[test]
    fn min_distance_grows_with_angle(a in 0.0f64..FRAC_PI_4, b in 0.0f64..FRAC_PI_4, p in 0.0f64..0.99) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(min_diamond_distance(lo, p) <= min_diamond_distance(hi, p) + 1e-15);
    }
}
