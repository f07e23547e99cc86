//! Smooth transitions, dyadic partitions and conic cutoffs.

use serde::{Deserialize, Serialize};

use super::{dot, norm};
use crate::error::{invalid, Result};

/// `h(u) = e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)})`, equal to 0 for `u <= 0` and 1 for `u >= 1`.
#[inline]
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

/// Radial cutoff equal to 1 on `[0, 1]` and 0 on `[2, inf)`.
#[inline]
pub fn radial_cutoff(r: f64) -> f64 {
    smooth_step(2.0 - r)
}

/// Low-frequency piece `q(r)`, equal to 1 for `r <= 2` and 0 for `r >= 4`.
#[inline]
pub fn lp_low(r: f64) -> f64 {
    radial_cutoff(0.5 * r)
}

/// Dyadic piece: `psi_0(r) = beta(r) - beta(2r)` and
/// `psi_k(r) = beta(r / 2^k) - beta(r / 2^{k-1})` for `k >= 1`.
///
/// `psi_k` is supported in `[2^{k-1}, 2^{k+1}]` and equals 1 at `r = 2^k`.
#[inline]
pub fn lp_piece(k: u32, r: f64) -> f64 {
    if k == 0 {
        radial_cutoff(r) - radial_cutoff(2.0 * r)
    } else {
        let s = (k as f64).exp2();
        radial_cutoff(r / s) - radial_cutoff(2.0 * r / s)
    }
}

/// Angle in `[0, pi]` between two nonzero vectors; `None` if either vanishes.
#[inline]
pub fn angle_between(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot(a, b) / (na * nb)).clamp(-1.0, 1.0).acos())
}

/// Cone of directions within `aperture / 2` of `axis` (full opening angle `aperture`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    axis: Vec<f64>,
    aperture: f64,
}

impl Cone {
    pub fn new(axis: &[f64], aperture: f64) -> Result<Self> {
        let n = norm(axis);
        if !(n > 0.0) || !n.is_finite() {
            return invalid("cone axis must be a nonzero finite vector");
        }
        if !(aperture > 0.0 && aperture < std::f64::consts::PI) {
            return invalid(format!("cone aperture {aperture} must lie in (0, pi)"));
        }
        Ok(Self {
            axis: axis.iter().map(|x| x / n).collect(),
            aperture,
        })
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    pub fn dim(&self) -> usize {
        self.axis.len()
    }

    /// True if the direction of `v` lies within half the aperture of the axis.
    pub fn contains(&self, v: &[f64]) -> bool {
        angle_between(&self.axis, v).is_some_and(|a| a <= 0.5 * self.aperture + 1e-12)
    }
}

/// Conic cutoff with parameter `theta0`: 1 when the angle to `axis` is at most
/// `theta0 / 2`, 0 when it is at least `theta0`, and 0 at the origin.
#[inline]
pub fn conic_value(axis: &[f64], theta0: f64, xi: &[f64]) -> f64 {
    match angle_between(axis, xi) {
        None => 0.0,
        Some(angle) => smooth_step((theta0 - angle) / (0.5 * theta0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn step_endpoints_and_symmetry() {
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        for i in 1..100 {
            let u = i as f64 / 100.0;
            assert!((smooth_step(u) + smooth_step(1.0 - u) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn dyadic_piece_peaks_at_its_scale() {
        for k in 0..12 {
            let s = (k as f64).exp2();
            assert!((lp_piece(k, s) - 1.0).abs() < 1e-14);
            assert_eq!(lp_piece(k, 0.49 * s), 0.0);
            assert_eq!(lp_piece(k, 2.01 * s), 0.0);
        }
    }

    #[test]
    fn conic_cutoff_plateau_and_support() {
        let axis = [1.0, 0.0];
        let theta0: f64 = 0.6;
        let dir = |a: f64| [a.cos(), a.sin()];
        assert_eq!(conic_value(&axis, theta0, &dir(0.29)), 1.0);
        assert_eq!(conic_value(&axis, theta0, &dir(0.61)), 0.0);
        assert_eq!(conic_value(&axis, theta0, &[0.0, 0.0]), 0.0);
        let mid = conic_value(&axis, theta0, &dir(0.45));
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn cone_rejects_bad_input() {
        assert!(Cone::new(&[0.0, 0.0], 0.5).is_err());
        assert!(Cone::new(&[1.0, 0.0], 0.0).is_err());
        assert!(Cone::new(&[1.0, 0.0], 4.0).is_err());
        let c = Cone::new(&[2.0, 0.0], 0.5).unwrap();
        assert!(c.contains(&[1.0, 0.2]));
        assert!(!c.contains(&[1.0, 0.3]));
    }

    proptest! {
        #[test]
        fn partition_of_unity(r in 0.0f64..5000.0) {
            let mut total = lp_low(r);
            for k in 2..16 {
                total += lp_piece(k, r);
            }
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn dyadic_pieces_sum_to_one_away_from_origin(r in 1.0f64..5000.0) {
            let total: f64 = (0..16).map(|k| lp_piece(k, r)).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn pieces_are_nonnegative(k in 0u32..14, r in 0.0f64..20000.0) {
            let v = lp_piece(k, r);
            prop_assert!((-1e-15..=1.0 + 1e-15).contains(&v));
        }
    }
}
