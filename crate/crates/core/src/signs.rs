//! Sign vectors capturing a `2/π` fraction of a complex vector's L1 norm.
//!
//! `g(φ) = Σ_k |Re(e^{iφ} x_k)|` has period π and is smooth between the
//! breakpoints `φ ≡ π/2 − arg x_k (mod π)`. On each piece the signs are fixed,
//! so `g(φ) = A cos φ + B sin φ` and the maximum is either the stationary
//! point `atan2(B, A)` or an endpoint. Averaging over φ gives
//! `(2/π) Σ|x_k|`, hence the maximum is at least that.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

pub const BRUTE_FORCE_MAX_D: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignSolution {
    /// Maximizing phase, reduced to `[0, π)` since `g` has period π.
    pub phi_star: f64,
    pub theta: Vec<i8>,
    /// `|Σ θ_k x_k|`.
    pub value: f64,
    /// `g(φ*)`.
    pub g_max: f64,
    pub l1: f64,
}

impl SignSolution {
    pub fn ratio(&self) -> f64 {
        self.value / self.l1
    }
}

/// `g(φ) = Σ_k |Re(e^{iφ} x_k)|`.
pub fn phase_objective(x: &[C64], phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    x.iter().map(|z| (z.re * c - z.im * s).abs()).sum()
}

/// `|Σ θ_k x_k|`.
pub fn signed_sum(x: &[C64], theta: &[i8]) -> f64 {
    x.iter().zip(theta).map(|(z, &t)| if t > 0 { *z } else { -*z }).sum::<C64>().norm()
}

pub fn best_phase_signs(x: &[C64]) -> Result<SignSolution> {
    if x.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return Err(Error::DegenerateInput("sign approximation of the zero vector".into()));
    }
    let mut breaks: Vec<f64> =
        x.iter().filter(|z| z.re != 0.0 || z.im != 0.0).map(|z| (PI / 2.0 - z.arg()).rem_euclid(PI)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|b, a| *b - *a <= 1e-15);

    let mut candidates = breaks.clone();
    for k in 0..breaks.len() {
        let lo = breaks[k];
        let hi = if k + 1 < breaks.len() { breaks[k + 1] } else { breaks[0] + PI };
        let mid = 0.5 * (lo + hi);
        let (ms, mc) = mid.sin_cos();
        let (mut a, mut b) = (0.0, 0.0);
        for z in x {
            let sign = if z.re * mc - z.im * ms >= 0.0 { 1.0 } else { -1.0 };
            a += sign * z.re;
            b -= sign * z.im;
        }
        let crit = b.atan2(a);
        for shift in [-TAU, 0.0, TAU] {
            let phi = crit + shift;
            if phi > lo && phi < hi {
                candidates.push(phi);
            }
        }
    }

    let mut phi_star = candidates[0];
    let mut g_max = phase_objective(x, phi_star);
    for &phi in &candidates[1..] {
        let g = phase_objective(x, phi);
        if g > g_max {
            g_max = g;
            phi_star = phi;
        }
    }
    let phi_star = phi_star.rem_euclid(PI);
    let (s, c) = phi_star.sin_cos();
    let theta: Vec<i8> = x.iter().map(|z| if z.re * c - z.im * s >= 0.0 { 1 } else { -1 }).collect();
    Ok(SignSolution { phi_star, value: signed_sum(x, &theta), theta, g_max, l1: x.iter().map(|z| z.norm()).sum() })
}

/// Exhaustive maximum of `|Σ θ_k x_k|`; ties go to the lexicographically
/// smallest θ with `+1 < −1`.
pub fn brute_force_signs(x: &[C64]) -> Result<(Vec<i8>, f64)> {
    let d = x.len();
    if d > BRUTE_FORCE_MAX_D {
        return Err(Error::Size(format!("brute force over 2^{d} sign vectors")));
    }
    if d == 0 {
        return Ok((Vec::new(), 0.0));
    }
    // θ and −θ give the same value and the one with θ_0 = +1 is smaller, so
    // only those are visited. Bit k of the mask set means θ_k = −1, and
    // visiting masks in order of their bit reversal walks θ lexicographically.
    let half = 1usize << (d - 1);
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for rev in 0..half {
        let mask = rev.reverse_bits() >> (usize::BITS as usize - d);
        let v = x.iter().enumerate().map(|(k, z)| if mask >> k & 1 == 1 { -*z } else { *z }).sum::<C64>().norm();
        if v > best.1 {
            best = (mask, v);
        }
    }
    let theta = (0..d).map(|k| if best.0 >> k & 1 == 1 { -1 } else { 1 }).collect();
    Ok((theta, best.1))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::rng;
    use crate::simcore::linalg::complex_gaussian;

    const TWO_OVER_PI: f64 = 2.0 / PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn positive_reals() {
        let s = best_phase_signs(&[c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(s.theta.iter().all(|&t| t == 1));
        assert!((s.value - 3.5).abs() < 1e-15);
        assert!(s.phi_star.min(PI - s.phi_star) < 1e-12);
    }

    #[test]
    fn one_and_i() {
        let x = [c(1.0, 0.0), c(0.0, 1.0)];
        let s = best_phase_signs(&x).unwrap();
        assert!((s.value - 2f64.sqrt()).abs() < 1e-12);
        assert!(s.value >= TWO_OVER_PI * 2.0);
        let (theta, v) = brute_force_signs(&x).unwrap();
        assert_eq!(theta, vec![1, 1]);
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn brute_force_cases() {
        assert_eq!(brute_force_signs(&[c(-3.0, 0.0)]).unwrap(), (vec![1], 3.0));
        assert_eq!(brute_force_signs(&[c(1.0, 0.0); 3]).unwrap(), (vec![1, 1, 1], 3.0));
        assert_eq!(brute_force_signs(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap(), (vec![1, -1], 2.0));
        assert!(matches!(brute_force_signs(&vec![c(1.0, 0.0); 21]), Err(Error::Size(_))));
    }

    #[test]
    fn brute_force_tie_break_is_lexicographic() {
        // x = (1, 0, 1): θ_1 is free, (+,+,+) precedes (+,−,+).
        assert_eq!(brute_force_signs(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap().0, vec![1, 1, 1]);
        // x = (1, 1, −1, 0): best is (+,+,−,·) with the free slot at +.
        assert_eq!(
            brute_force_signs(&[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]).unwrap().0,
            vec![1, 1, -1, 1]
        );
    }

    // Exhaustive search written independently of the mask ordering trick.
    fn naive_max(x: &[C64]) -> f64 {
        (0..1usize << x.len())
            .map(|m| x.iter().enumerate().map(|(k, z)| if m >> k & 1 == 1 { -*z } else { *z }).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn random_vectors_against_brute_force() {
        let mut r = rng::stream(2024);
        for _ in 0..100 {
            let x: Vec<C64> = (0..10).map(|_| complex_gaussian(&mut r)).collect();
            let s = best_phase_signs(&x).unwrap();
            let (_, bf) = brute_force_signs(&x).unwrap();
            assert!(s.value >= TWO_OVER_PI * s.l1);
            assert!(s.value <= bf + 1e-12);
            assert!(s.g_max <= s.value + 1e-12);
            assert!((bf - naive_max(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn g_max_beats_a_fine_grid() {
        let mut r = rng::stream(5);
        for _ in 0..20 {
            let x: Vec<C64> = (0..7).map(|_| complex_gaussian(&mut r)).collect();
            let s = best_phase_signs(&x).unwrap();
            let grid = (0..20_000).map(|k| phase_objective(&x, PI * k as f64 / 20_000.0)).fold(0.0, f64::max);
            assert!(s.g_max >= grid - 1e-12);
            assert!(s.g_max - grid < 1e-6);
        }
    }

    #[test]
    fn zeros_get_plus_and_zero_vector_errors() {
        let s = best_phase_signs(&[c(0.0, 0.0), c(0.0, 2.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(s.theta[0], 1);
        assert_eq!(s.theta[2], 1);
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!(matches!(best_phase_signs(&[c(0.0, 0.0)]), Err(Error::DegenerateInput(_))));
    }

    fn complex_vec(max_d: usize) -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -6i32..=6), 1..=max_d)
            .prop_map(|v| v.into_iter().map(|(re, im, e)| C64::new(re, im) * 10f64.powi(e)).collect())
    }

    proptest! {
        #[test]
        fn captures_two_over_pi(x in complex_vec(16)) {
            prop_assume!(x.iter().any(|z| z.norm() > 0.0));
            let s = best_phase_signs(&x).unwrap();
            prop_assert!(s.value >= TWO_OVER_PI * s.l1 - 1e-12 * s.l1);
        }

        #[test]
        fn sandwich(x in complex_vec(12)) {
            prop_assume!(x.iter().any(|z| z.norm() > 0.0));
            let s = best_phase_signs(&x).unwrap();
            let (_, bf) = brute_force_signs(&x).unwrap();
            prop_assert!(s.g_max <= s.value * (1.0 + 1e-12));
            prop_assert!(s.value <= bf * (1.0 + 1e-12));
        }

        #[test]
        fn scale_equivariance(x in complex_vec(10), c in 1e-3f64..1e3) {
            prop_assume!(x.iter().any(|z| z.norm() > 1e-300));
            let s = best_phase_signs(&x).unwrap();
            let y: Vec<C64> = x.iter().map(|z| z * c).collect();
            let t = best_phase_signs(&y).unwrap();
            prop_assert_eq!(&t.theta, &s.theta);
            prop_assert!(((t.value - c * s.value) / (c * s.value)).abs() < 1e-12);
            prop_assert!((t.g_max - c * s.g_max).abs() <= 1e-12 * c * s.g_max);
        }

        #[test]
        fn global_phase_covariance(x in complex_vec(10), gamma in 0.0f64..TAU) {
            prop_assume!(x.iter().any(|z| z.norm() > 1e-300));
            let s = best_phase_signs(&x).unwrap();
            let y: Vec<C64> = x.iter().map(|z| z * C64::from_polar(1.0, gamma)).collect();
            let t = best_phase_signs(&y).unwrap();
            prop_assert!((t.g_max - s.g_max).abs() <= 1e-12 * s.g_max);
            // The shifted phase is also optimal for the rotated input.
            prop_assert!((phase_objective(&y, s.phi_star - gamma) - t.g_max).abs() <= 1e-12 * s.g_max);
        }
    }
}
