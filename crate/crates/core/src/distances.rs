//! Exact error calculus for replacing one `Z_α` by the mixture
//! `E_{θ,p}(ρ) = pρ + (1−p) Z_θ ρ Z_θ†`.
//!
//! Everything reduces to the complex number
//! `B = e^{−iα} − (1−p) e^{−iθ} − p`, the off-diagonal discrepancy between the
//! two channels. The diamond distance is `|B|`; the typical-error measures are
//! fixed multiples of it. The optimal over-rotation and the resulting minimal
//! distance have closed forms, evaluated here in cancellation-free algebraic
//! rearrangements so they stay accurate for the tiny angles that matter most.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::trace_ascent::{AscentOptions, UnitaryMixtureDifference};

/// `d_F / d_◇` for a single replacement.
pub const FROBENIUS_RATIO: f64 = PI / (4.0 * SQRT_2);
/// `d_{1,av} / d_◇` for a single replacement.
pub const TRACE_RATIO: f64 = PI / 4.0;
/// `d_av / d_◇` for a single replacement.
pub const AVG_CASE_RATIO: f64 = 1.0 / (2.0 * SQRT_2);

/// Target phase `alpha`, over-rotation `theta`, identity-branch weight `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReplacementChannelParams {
    pub alpha: f64,
    pub theta: f64,
    pub p: f64,
}

impl ReplacementChannelParams {
    pub fn new(alpha: f64, theta: f64, p: f64) -> Result<Self> {
        let params = ReplacementChannelParams { alpha, theta, p };
        params.validate()?;
        Ok(params)
    }

    /// The mixture at its optimal over-rotation for `(alpha, p)`.
    pub fn optimal(alpha: f64, p: f64) -> Result<Self> {
        check_p(p)?;
        Self::new(alpha, optimal_theta(alpha, p), p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !self.theta.is_finite() {
            return Err(Error::param("replacement angles must be finite"));
        }
        check_p(self.p)
    }

    /// `B = e^{−iα} − (1−p)e^{−iθ} − p`.
    pub fn discrepancy(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.alpha)
            - Complex64::from_polar(1.0 - self.p, -self.theta)
            - self.p
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("probability p = {p} outside [0, 1]")));
    }
    Ok(())
}

pub fn diamond_distance_single(params: &ReplacementChannelParams) -> f64 {
    params.discrepancy().norm()
}

/// The same distance written as a real radical. Kept as a cross-check for
/// [`diamond_distance_single`]; it loses relative accuracy near zero.
pub fn diamond_distance_single_radical(params: &ReplacementChannelParams) -> f64 {
    let ReplacementChannelParams { alpha, theta, p } = *params;
    let inner = (p - 1.0) * alpha.sin() * theta.sin() + p * p - p + 1.0
        + (p - 1.0) * (alpha.cos() - p) * theta.cos()
        - p * alpha.cos();
    SQRT_2 * inner.max(0.0).sqrt()
}

/// `|1 − p e^{iα}|`, computed without cancellation.
fn chord(alpha: f64, p: f64) -> f64 {
    let h = (alpha / 2.0).sin();
    ((1.0 - p).powi(2) + 4.0 * p * h * h).sqrt()
}

/// Over-rotation minimizing the diamond distance at fixed `(alpha, p)`:
/// `θ̃ = 2 atan((p − cos α + √(1 + p² − 2p cos α)) / sin α)`.
///
/// Evaluated as `2 atan(tan(α/2) · (1 + 2p / (r + 1 − p)))` with
/// `r = |1 − p e^{iα}|`, which is the same expression with the 0/0 at α = 0
/// removed; it returns 0 there and is odd in α.
pub fn optimal_theta(alpha: f64, p: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let r = chord(alpha, p);
    2.0 * ((alpha / 2.0).tan() * (1.0 + 2.0 * p / (r + 1.0 - p))).atan()
}

/// Minimal diamond distance over θ:
/// `√2 (1 − p + p² − p cos α − (1−p)√(1 + p² − 2p cos α))^{1/2}`.
///
/// The bracket equals `(r − (1−p))² / 2`, so the distance is `r − (1−p)`,
/// evaluated as `4p sin²(α/2) / (r + 1 − p)`. At `p = 1` this is the pure
/// squashing distance `2|sin(α/2)|`.
pub fn min_diamond_distance(alpha: f64, p: f64) -> f64 {
    let h = (alpha / 2.0).sin();
    let r = chord(alpha, p);
    let denom = r + 1.0 - p;
    if denom == 0.0 {
        return 0.0;
    }
    4.0 * p * h * h / denom
}

/// The literal radical form of [`min_diamond_distance`], for cross-checks.
pub fn min_diamond_distance_radical(alpha: f64, p: f64) -> f64 {
    let c = alpha.cos();
    let inner = 1.0 - p + p * p - p * c - (1.0 - p) * (1.0 + p * p - 2.0 * p * c).sqrt();
    SQRT_2 * inner.max(0.0).sqrt()
}

/// Haar-averaged Frobenius distance of the output states.
pub fn frobenius_avg_single(params: &ReplacementChannelParams) -> f64 {
    FROBENIUS_RATIO * diamond_distance_single(params)
}

/// Haar-averaged trace distance of the output states.
pub fn trace_avg_single(params: &ReplacementChannelParams) -> f64 {
    TRACE_RATIO * diamond_distance_single(params)
}

/// Average-case (Choi–Frobenius) distance.
pub fn avg_case_single(params: &ReplacementChannelParams) -> f64 {
    AVG_CASE_RATIO * diamond_distance_single(params)
}

/// All five single-replacement measures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleReport {
    pub params: ReplacementChannelParams,
    pub diamond: f64,
    pub diamond_min: f64,
    pub frobenius_avg: f64,
    pub trace_avg: f64,
    pub avg_case: f64,
}

pub fn single_report(params: &ReplacementChannelParams) -> SingleReport {
    SingleReport {
        params: *params,
        diamond: diamond_distance_single(params),
        diamond_min: min_diamond_distance(params.alpha, params.p),
        frobenius_avg: frobenius_avg_single(params),
        trace_avg: trace_avg_single(params),
        avg_case: avg_case_single(params),
    }
}

/// Result of the numerical diamond-distance search.
#[derive(Clone, Debug)]
pub struct BruteForceResult {
    /// Best trace norm found: a certified lower bound on the diamond distance.
    pub value: f64,
    /// `x = |u₁|² + |u₂|²`, the system-|0⟩ weight of the maximizing input.
    pub system_zero_weight: f64,
}

fn diag2(a: Complex64, b: Complex64) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[a, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), b])
}

/// Numerically maximizes `‖(Z_α⊗I − E_{θ,p}⊗I)(|u⟩⟨u|)‖₁` over normalized
/// `u ∈ C²⊗C²` by multi-start ascent. Independent of the closed forms.
pub fn brute_force_diamond_single(
    params: &ReplacementChannelParams,
    n_restarts: usize,
) -> BruteForceResult {
    let one = Complex64::new(1.0, 0.0);
    let target = diag2(one, Complex64::from_polar(1.0, params.alpha));
    let over = diag2(one, Complex64::from_polar(1.0, params.theta));
    let identity = DMatrix::identity(2, 2);
    let map = UnitaryMixtureDifference::new(
        2,
        vec![(1.0, target), (-params.p, identity), (-(1.0 - params.p), over)],
    );
    let opts = AscentOptions {
        restarts: n_restarts,
        ..AscentOptions::default()
    };
    let res = map.maximize(&opts);
    let x = res.argmax.row(0).norm_squared();
    BruteForceResult {
        value: res.value,
        system_zero_weight: x,
    }
}

/// Monte-Carlo estimate (mean, standard error) of one per-state distance over
/// Haar-random qubit states `(e^{iφ₁}√a, e^{iφ₂}√(1−a))`.
fn haar_single_mc(
    params: &ReplacementChannelParams,
    n_samples: usize,
    seed: u64,
    trace_norm: bool,
) -> Result<(f64, f64)> {
    if n_samples == 0 {
        return Err(Error::param("need at least one Monte-Carlo sample"));
    }
    let mut rng = rng_from_seed(seed);
    let target = Complex64::from_polar(1.0, params.alpha);
    let over = Complex64::from_polar(1.0, params.theta);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_samples {
        let a: f64 = rng.random();
        let phi1 = 2.0 * PI * rng.random::<f64>();
        let phi2 = 2.0 * PI * rng.random::<f64>();
        let psi = [
            Complex64::from_polar(a.sqrt(), phi1),
            Complex64::from_polar((1.0 - a).sqrt(), phi2),
        ];
        // output density matrices, entry by entry
        let pure = |u: Complex64| {
            let v = [psi[0], u * psi[1]];
            [
                v[0] * v[0].conj(),
                v[0] * v[1].conj(),
                v[1] * v[0].conj(),
                v[1] * v[1].conj(),
            ]
        };
        let rz = pure(target);
        let ri = pure(Complex64::new(1.0, 0.0));
        let rt = pure(over);
        let diff: Vec<Complex64> = (0..4)
            .map(|k| rz[k] - params.p * ri[k] - (1.0 - params.p) * rt[k])
            .collect();
        let value = if trace_norm {
            // 2x2 Hermitian: eigenvalues m ± sqrt(((a−d)/2)² + |b|²)
            let m = (diff[0].re + diff[3].re) / 2.0;
            let rad = (((diff[0].re - diff[3].re) / 2.0).powi(2) + diff[1].norm_sqr()).sqrt();
            (m + rad).abs() + (m - rad).abs()
        } else {
            diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        };
        sum += value;
        sum_sq += value * value;
    }
    Ok(mean_stderr(sum, sum_sq, n_samples))
}

pub(crate) fn mean_stderr(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Haar Monte-Carlo estimate of the average Frobenius distance.
pub fn haar_frobenius_mc_single(
    params: &ReplacementChannelParams,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    haar_single_mc(params, n_samples, seed, false)
}

/// Haar Monte-Carlo estimate of the average trace distance.
pub fn haar_trace_mc_single(
    params: &ReplacementChannelParams,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    haar_single_mc(params, n_samples, seed, true)
}

/// Monte-Carlo estimate of `E[√(a(1−a))]` for `a ~ U[0,1]` (exactly π/8).
pub fn sqrt_a_one_minus_a_mc(n_samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = rng_from_seed(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_samples {
        let a: f64 = rng.random();
        let v = (a * (1.0 - a)).sqrt();
        sum += v;
        sum_sq += v * v;
    }
    mean_stderr(sum, sum_sq, n_samples.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn identical_channels_have_zero_distance() {
        let p = ReplacementChannelParams::new(0.3, 0.3, 0.0).unwrap();
        assert_eq!(diamond_distance_single(&p), 0.0);
        assert_eq!(frobenius_avg_single(&p), 0.0);
        assert_eq!(trace_avg_single(&p), 0.0);
        assert_eq!(avg_case_single(&p), 0.0);
    }

    #[test]
    fn full_identity_weight_is_squashing() {
        for &(a, t) in &[(0.3, 1.1), (-0.7, 0.2), (FRAC_PI_4, -2.0)] {
            let p = ReplacementChannelParams::new(a, t, 1.0).unwrap();
            let want = 2.0 * (a / 2.0).sin().abs();
            assert!((diamond_distance_single(&p) - want).abs() < 1e-15);
            assert!((min_diamond_distance(a, 1.0) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn radical_form_agrees() {
        for &(a, t, p) in &[(0.3, 0.35, 0.2), (-0.5, 0.9, 0.7), (0.78, -1.3, 0.05)] {
            let prm = ReplacementChannelParams::new(a, t, p).unwrap();
            assert!(
                (diamond_distance_single(&prm) - diamond_distance_single_radical(&prm)).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn zero_p_theta_is_alpha() {
        for a in [0.01, 0.3, -0.6, FRAC_PI_4] {
            assert!((optimal_theta(a, 0.0) - a).abs() < 1e-15);
            assert_eq!(min_diamond_distance(a, 0.0), 0.0);
        }
        assert_eq!(optimal_theta(0.0, 0.5), 0.0);
    }

    #[test]
    fn min_distance_forms_agree() {
        for &(a, p) in &[(0.3, 0.5), (0.7, 0.9), (-0.2, 0.1), (FRAC_PI_4, 0.99)] {
            assert!((min_diamond_distance(a, p) - min_diamond_distance_radical(a, p)).abs() < 1e-12);
            let at_opt =
                diamond_distance_single(&ReplacementChannelParams::optimal(a, p).unwrap());
            assert!((at_opt - min_diamond_distance(a, p)).abs() < 1e-14);
        }
    }

    #[test]
    fn params_validation() {
        assert!(ReplacementChannelParams::new(0.1, 0.1, 1.5).is_err());
        assert!(ReplacementChannelParams::new(f64::NAN, 0.1, 0.5).is_err());
        assert!(haar_frobenius_mc_single(&ReplacementChannelParams::new(0.1, 0.1, 0.5).unwrap(), 0, 1).is_err());
    }

    #[test]
    fn brute_force_trivial_zero() {
        let p = ReplacementChannelParams::new(0.4, 0.4, 0.0).unwrap();
        assert!(brute_force_diamond_single(&p, 4).value < 1e-12);
    }

    #[test]
    fn zero_distance_mc_is_exact_zero() {
        let p = ReplacementChannelParams::new(0.2, 0.2, 0.0).unwrap();
        let (m, e) = haar_frobenius_mc_single(&p, 1000, 3).unwrap();
        assert!(m < 1e-15 && e < 1e-15);
    }
}
