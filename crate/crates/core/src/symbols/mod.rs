//! Phases, amplitudes, Fourier multipliers, smooth cutoffs and the exponent table.

mod cutoffs;
mod exponents;
mod multipliers;
mod phase;

pub use cutoffs::{
    angle_between, conic_value, lp_low, lp_piece, radial_cutoff, smooth_step, Cone,
};
pub use exponents::{exponents, Exponent, ExponentTable, Regime};
pub(crate) use exponents::ratio_f64;
pub use multipliers::{
    ball_volume, complex_mean_multiplier, complex_mean_order, complex_mean_symbol,
    littlewood_paley, sobolev_weight, sphere_area, sphere_transform, spherical_multiplier,
    LittlewoodPaley, MultiplierSpec,
};
pub use phase::{AmplitudeForm, AmplitudeSpec, PhaseKind, PhaseSpec};

/// Euclidean length of the first `dim` components.
#[inline]
pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
