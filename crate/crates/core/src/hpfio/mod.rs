//! Hardy spaces for Fourier integral operators: the `phi_omega` family, the
//! direction frames `Theta_k` with their partition `chi_nu`, and two norm
//! estimators.
//!
//! The quadrature estimator evaluates
//! `||q(D) <D>^s f||_p + (int_{S^{n-1}} ||phi_omega(D) <D>^s f||_p^p d omega)^{1/p}`.
//! The packet estimator applies to data in one dyadic shell `k` and evaluates
//! `2^{ks} 2^{k(n-1)/2 (1/2 - 1/p)} (sum_nu ||chi_nu(D) f||_p^p)^{1/p}`.

mod frame;
mod norms;

pub use frame::{direction_set, fibonacci_sphere, DirectionSet, FramePartition};
pub use norms::{
    hpfio_norm_packet, hpfio_norm_quadrature, phi_normalizer, phi_omega, quadrature_directions,
    sobolev_norm, HpfioOptions, SHELL_LEAKAGE_TOLERANCE,
};
