//! Numerical laboratory for local-smoothing and maximal-function estimates of
//! half-wave propagators, spherical means and complex spherical means, measured
//! against Hardy spaces for Fourier integral operators.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: periodic grids, sampled fields, discrete Fourier transforms and norms.
//! - [`specfun`]: Bessel functions of real order.
//! - [`symbols`]: phases, amplitudes, Fourier multipliers and the exponent table.
//! - [`propagate`]: fixed-time operators and maximal functions over time grids.
//! - [`hpfio`]: wave-packet frames and the two Hardy-space norm estimators.
//! - [`packets`]: wave packets, Knapp sums, random shell fields, tubes and flow residuals.
//! - [`lab`]: experiment configuration, scaling reports, slope fits and plots.

pub mod error;
pub mod hpfio;
pub mod lab;
pub mod lattice;
pub mod packets;
pub mod propagate;
pub mod specfun;
pub mod symbols;


pub use error::{Error, Result};
pub use lattice::{Domain, Field, GridSpec};
