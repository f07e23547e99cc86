//! Exact exponent arithmetic for the fixed-time and maximal-function estimates.
//!
//! With `s(p) = (n-1)/2 |1/2 - 1/p|` and threshold `2(n+1)/(n-1)`:
//!
//! - `d(p) = s(p)` for `1 <= p <= 2`;
//! - `d(p) = 0` for `2 <= p <= 2(n+1)/(n-1)`;
//! - `d(p) = s(p) - 1/p` above the threshold.
//!
//! Maximal functions of `e^{it phi(D)}` are targeted at `d(p) + 1/p`, those of
//! hypersurface means at `d(p) + 1/p - (n-1)/2`.

use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Result};

/// A Lebesgue exponent `1 <= p <= inf`, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Rational64),
    Infinite,
}

impl Exponent {
    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return invalid("zero denominator");
        }
        Self::from_ratio(Rational64::new(num, den))
    }

    fn from_ratio(r: Rational64) -> Result<Self> {
        if r < Rational64::one() {
            return invalid(format!("exponent {r} must be >= 1"));
        }
        Ok(Exponent::Finite(r))
    }

    /// Converts a float; `inf` maps to [`Exponent::Infinite`].
    pub fn from_f64(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            return Ok(Exponent::Infinite);
        }
        if !p.is_finite() {
            return invalid(format!("exponent {p} is not a number"));
        }
        match Rational64::approximate_float(p) {
            Some(r) => Self::from_ratio(r),
            None => invalid(format!("exponent {p} has no rational approximation")),
        }
    }

    /// `1/p`, zero for `p = inf`.
    pub fn reciprocal(&self) -> Rational64 {
        match self {
            Exponent::Finite(r) => r.recip(),
            Exponent::Infinite => Rational64::zero(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Exponent::Finite(r) => ratio_f64(*r),
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinite => write!(f, "inf"),
            Exponent::Finite(r) => write!(f, "{}", ratio_f64(*r)),
        }
    }
}

pub(crate) fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Which branch of `d(p)` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `1 <= p <= 2`
    Low,
    /// `2 < p < 2(n+1)/(n-1)`
    Intermediate,
    /// `p >= 2(n+1)/(n-1)`
    High,
}

/// Exponents attached to a dimension and a Lebesgue exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentTable {
    pub n: u32,
    pub p: Exponent,
    pub s_p: Rational64,
    pub d_p: Rational64,
    pub threshold: Rational64,
    /// `d(p) + 1/p`
    pub maximal_target: Rational64,
    /// `d(p) + 1/p - (n-1)/2`
    pub hypersurface_target: Rational64,
}

impl ExponentTable {
    pub fn regime(&self) -> Regime {
        let two = Rational64::from_integer(2);
        match self.p {
            Exponent::Infinite => Regime::High,
            Exponent::Finite(p) if p <= two => Regime::Low,
            Exponent::Finite(p) if p >= self.threshold => Regime::High,
            Exponent::Finite(_) => Regime::Intermediate,
        }
    }

    /// Smoothness target for complex spherical means of order `alpha`.
    pub fn complex_mean_target(&self, alpha: f64) -> f64 {
        ratio_f64(self.hypersurface_target) - alpha
    }

    /// Signed fixed-time loss `(n-1)/2 (1/2 - 1/p)`.
    pub fn fixed_time_loss(&self) -> Rational64 {
        half_dim(self.n) * (Rational64::new(1, 2) - self.p.reciprocal())
    }

    /// Lower bound for the maximal-function loss for `p <= 2`,
    /// `(n-1)/2 (1/p - 1/2) + 1/p`.
    pub fn maximal_loss_low(&self) -> Rational64 {
        let r = self.p.reciprocal();
        half_dim(self.n) * (r - Rational64::new(1, 2)) + r
    }
}

fn half_dim(n: u32) -> Rational64 {
    Rational64::new(n as i64 - 1, 2)
}

/// Builds the exponent table for `n >= 2`.
pub fn exponents(n: u32, p: Exponent) -> Result<ExponentTable> {
    if n < 2 {
        return invalid(format!("dimension {n} must be >= 2"));
    }
    let recip = p.reciprocal();
    let half = Rational64::new(1, 2);
    let s_p = half_dim(n) * (half - recip).abs();
    let threshold = Rational64::new(2 * (n as i64 + 1), n as i64 - 1);
    let two = Rational64::from_integer(2);
    let d_p = match p {
        Exponent::Finite(q) if q <= two => s_p,
        Exponent::Finite(q) if q < threshold => Rational64::zero(),
        _ => s_p - recip,
    };
    let maximal_target = d_p + recip;
    Ok(ExponentTable {
        n,
        p,
        s_p,
        d_p,
        threshold,
        maximal_target,
        hypersurface_target: maximal_target - half_dim(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn table_in_the_plane() {
        // (p, s, d, maximal target, hypersurface target), hand-derived for n = 2
        let cases = [
            (Exponent::ratio(1, 1).unwrap(), r(1, 4), r(1, 4), r(5, 4), r(3, 4)),
            (Exponent::ratio(5, 4).unwrap(), r(3, 20), r(3, 20), r(19, 20), r(9, 20)),
            (Exponent::ratio(2, 1).unwrap(), r(0, 1), r(0, 1), r(1, 2), r(0, 1)),
            (Exponent::ratio(4, 1).unwrap(), r(1, 8), r(0, 1), r(1, 4), r(-1, 4)),
            (Exponent::ratio(6, 1).unwrap(), r(1, 6), r(0, 1), r(1, 6), r(-1, 3)),
            (Exponent::Infinite, r(1, 4), r(1, 4), r(1, 4), r(-1, 4)),
        ];
        for (p, s, d, m, h) in cases {
            let t = exponents(2, p).unwrap();
            assert_eq!((t.s_p, t.d_p, t.maximal_target, t.hypersurface_target), (s, d, m, h), "{p}");
            assert_eq!(t.threshold, r(6, 1));
        }
    }

    #[test]
    fn table_in_three_dimensions() {
        let cases = [
            (Exponent::ratio(1, 1).unwrap(), r(1, 2), r(1, 2), r(3, 2), r(1, 2)),
            (Exponent::ratio(5, 4).unwrap(), r(3, 10), r(3, 10), r(11, 10), r(1, 10)),
            (Exponent::ratio(2, 1).unwrap(), r(0, 1), r(0, 1), r(1, 2), r(-1, 2)),
            (Exponent::ratio(3, 1).unwrap(), r(1, 6), r(0, 1), r(1, 3), r(-2, 3)),
            (Exponent::ratio(4, 1).unwrap(), r(1, 4), r(0, 1), r(1, 4), r(-3, 4)),
            (Exponent::ratio(6, 1).unwrap(), r(1, 3), r(1, 6), r(1, 3), r(-2, 3)),
            (Exponent::Infinite, r(1, 2), r(1, 2), r(1, 2), r(-1, 2)),
        ];
        for (p, s, d, m, h) in cases {
            let t = exponents(3, p).unwrap();
            assert_eq!((t.s_p, t.d_p, t.maximal_target, t.hypersurface_target), (s, d, m, h), "{p}");
            assert_eq!(t.threshold, r(4, 1));
        }
    }

    #[test]
    fn branches_agree_at_the_breakpoints() {
        for n in 2..6u32 {
            let thr = r(2 * (n as i64 + 1), n as i64 - 1);
            let t = exponents(n, Exponent::Finite(thr)).unwrap();
            assert_eq!(t.d_p, Rational64::zero());
            assert_eq!(t.regime(), Regime::High);
            let two = exponents(n, Exponent::ratio(2, 1).unwrap()).unwrap();
            assert_eq!(two.regime(), Regime::Low);
            assert_eq!(two.d_p, Rational64::zero());
        }
    }

    #[test]
    fn float_conversion_and_errors() {
        assert_eq!(Exponent::from_f64(1.25).unwrap(), Exponent::ratio(5, 4).unwrap());
        assert_eq!(Exponent::from_f64(f64::INFINITY).unwrap(), Exponent::Infinite);
        assert!(Exponent::from_f64(0.5).is_err());
        assert!(Exponent::from_f64(f64::NAN).is_err());
        assert!(exponents(1, Exponent::Infinite).is_err());
        assert_eq!(Exponent::ratio(5, 4).unwrap().to_string(), "1.25");
        assert_eq!(Exponent::Infinite.to_string(), "inf");
    }

    #[test]
    fn sharpness_exponents() {
        let t = exponents(2, Exponent::ratio(5, 4).unwrap()).unwrap();
        assert_eq!(t.maximal_loss_low(), r(19, 20));
        let t = exponents(2, Exponent::ratio(6, 1).unwrap()).unwrap();
        assert_eq!(t.fixed_time_loss(), r(1, 6));
    }
}
