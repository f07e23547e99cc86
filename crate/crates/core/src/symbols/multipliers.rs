//! Fourier multipliers: propagator symbols, spherical and complex means,
//! Littlewood-Paley pieces and Sobolev weights.
//!
//! Means are taken in the angular convention `f^(xi) = int f e^{-i x.xi} dx`:
//!
//! - the surface measure of the unit sphere has transform
//!   `sigma^(xi) = (2 pi)^{n/2} |xi|^{-(n-2)/2} J_{(n-2)/2}(|xi|)`;
//! - the complex mean of order `alpha` has symbol
//!   `m_alpha(xi) = 2^{beta} pi^{n/2} |xi|^{-beta} J_beta(|xi|)` with `beta = n/2 + alpha - 1`,
//!   so `m_1` is the transform of the unit-ball indicator and `m_0 = sigma^ / 2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use super::cutoffs::{lp_low, lp_piece};
use super::norm;
use super::phase::{AmplitudeSpec, PhaseSpec};
use crate::error::{invalid, Result};
use crate::lattice::{Domain, Field, GridSpec};
use crate::specfun::bessel_ratio;

/// `|S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(0.5 * n as f64) / gamma(0.5 * n as f64)
}

/// `|B_1| = pi^{n/2} / Gamma(n/2 + 1)`.
pub fn ball_volume(n: usize) -> f64 {
    PI.powf(0.5 * n as f64) / gamma(0.5 * n as f64 + 1.0)
}

/// `sigma^(r)` for the unit sphere in `R^n` at radius `r = |xi|`.
pub fn sphere_transform(n: usize, r: f64) -> Result<f64> {
    let nu = 0.5 * (n as f64 - 2.0);
    Ok((2.0 * PI).powf(0.5 * n as f64) * bessel_ratio(nu, r)?)
}

/// Bessel order `n/2 + alpha - 1` of the complex mean; must be nonnegative.
pub fn complex_mean_order(n: usize, alpha: f64) -> Result<f64> {
    let beta = 0.5 * n as f64 + alpha - 1.0;
    if !alpha.is_finite() || beta < 0.0 {
        return invalid(format!(
            "complex mean order alpha = {alpha} needs n/2 + alpha - 1 >= 0"
        ));
    }
    Ok(beta)
}

/// `m_alpha(r)` at radius `r = |xi|`.
pub fn complex_mean_symbol(n: usize, alpha: f64, r: f64) -> Result<f64> {
    let beta = complex_mean_order(n, alpha)?;
    Ok(2f64.powf(beta) * PI.powf(0.5 * n as f64) * bessel_ratio(beta, r)?)
}

/// `<xi>^s = (1 + |xi|^2)^{s/2}`.
#[inline]
pub fn sobolev_weight(xi: &[f64], s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    (1.0 + xi.iter().map(|x| x * x).sum::<f64>()).powf(0.5 * s)
}

/// A Fourier multiplier, either a propagator symbol or a tabulated array.
#[derive(Debug, Clone)]
pub enum MultiplierSpec {
    /// `e^{i t phi(xi)} a(t xi)`
    Propagator {
        phase: PhaseSpec,
        amplitude: AmplitudeSpec,
        time: f64,
    },
    /// Values on a frequency lattice.
    Table(Field),
}

impl MultiplierSpec {
    /// Values on the frequency lattice of `grid`.
    pub fn tabulate(&self, grid: &GridSpec) -> Result<Field> {
        match self {
            MultiplierSpec::Table(f) => {
                f.grid().ensure_same(grid)?;
                f.expect_domain(Domain::Frequency)?;
                Ok(f.clone())
            }
            MultiplierSpec::Propagator {
                phase,
                amplitude,
                time,
            } => {
                if phase.dim() != grid.dim() {
                    return invalid("phase dimension differs from grid dimension");
                }
                let t = *time;
                Ok(Field::from_frequency_fn(*grid, |xi| {
                    let scaled: Vec<f64> = xi.iter().map(|x| t * x).collect();
                    Complex64::from_polar(amplitude.eval(&scaled), t * phase.eval(xi))
                }))
            }
        }
    }
}

fn radial_table(grid: &GridSpec, f: impl Fn(f64) -> Result<f64>) -> Result<MultiplierSpec> {
    let mut samples = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let xi = grid.frequency(idx);
        samples.push(Complex64::new(f(norm(&xi[..grid.dim()]))?, 0.0));
    }
    Ok(MultiplierSpec::Table(Field::new(
        *grid,
        Domain::Frequency,
        samples,
    )?))
}

/// Tabulated `sigma^(t xi)`, divided by `|S^{n-1}|` when `normalized`.
pub fn spherical_multiplier(grid: &GridSpec, t: f64, normalized: bool) -> Result<MultiplierSpec> {
    if !(t > 0.0) || !t.is_finite() {
        return invalid(format!("spherical mean radius {t} must be positive"));
    }
    let n = grid.dim();
    let scale = if normalized { 1.0 / sphere_area(n) } else { 1.0 };
    radial_table(grid, |r| Ok(scale * sphere_transform(n, t * r)?))
}

/// Tabulated `m_alpha(t xi)`.
pub fn complex_mean_multiplier(grid: &GridSpec, t: f64, alpha: f64) -> Result<MultiplierSpec> {
    if !(t > 0.0) || !t.is_finite() {
        return invalid(format!("complex mean radius {t} must be positive"));
    }
    let n = grid.dim();
    complex_mean_order(n, alpha)?;
    radial_table(grid, |r| complex_mean_symbol(n, alpha, t * r))
}

/// Tabulated low-pass `q` and dyadic pieces `psi_0, ..., psi_K`, with `K` the
/// first shell containing every lattice frequency.
#[derive(Debug, Clone)]
pub struct LittlewoodPaley {
    pub low: Field,
    pub pieces: Vec<Field>,
}

pub fn littlewood_paley(grid: &GridSpec) -> Result<LittlewoodPaley> {
    let dim = grid.dim();
    let rmax = (0..grid.len())
        .map(|i| norm(&grid.frequency(i)[..dim]))
        .fold(0.0, f64::max);
    let top = rmax.max(1.0).log2().ceil() as u32;
    let low = Field::from_frequency_fn(*grid, |xi| Complex64::new(lp_low(norm(xi)), 0.0));
    let pieces = (0..=top)
        .map(|k| Field::from_frequency_fn(*grid, |xi| Complex64::new(lp_piece(k, norm(xi)), 0.0)))
        .collect();
    Ok(LittlewoodPaley { low, pieces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gauss_quad::GaussLegendre;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn areas_and_volumes() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((ball_volume(2) - PI).abs() < 1e-13);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn values_at_the_origin() {
        for n in [2, 3] {
            assert!((sphere_transform(n, 0.0).unwrap() - sphere_area(n)).abs() < 1e-12);
            assert!((complex_mean_symbol(n, 1.0, 0.0).unwrap() - ball_volume(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_transform_matches_angular_quadrature() {
        // int_0^{2 pi} e^{-i r cos a} da by the trapezoid rule
        for &r in &[0.3, 2.0, 7.5, 31.0] {
            let m = 512;
            let q: f64 = (0..m)
                .map(|j| (r * (j as f64 * 2.0 * PI / m as f64).cos()).cos())
                .sum::<f64>()
                * 2.0
                * PI
                / m as f64;
            assert!((sphere_transform(2, r).unwrap() - q).abs() < 1e-10);
        }
    }

    #[test]
    fn ball_transform_matches_radial_quadrature() {
        // int_{|y| <= 1} e^{-i y.xi} dy = 2 pi int_0^1 J_0(r rho) rho d rho in the plane
        let gl = GaussLegendre::new(64.try_into().unwrap());
        for &r in &[0.5, 3.0, 12.0] {
            let q = 2.0 * PI * gl.integrate(0.0, 1.0, |rho| {
                crate::specfun::bessel_j(0.0, r * rho).unwrap() * rho
            });
            assert!((complex_mean_symbol(2, 1.0, r).unwrap() - q).abs() < 1e-10);
        }
    }

    #[test]
    fn order_zero_is_half_the_sphere() {
        let grid = GridSpec::new(2, 32, 8.0).unwrap();
        let sphere = spherical_multiplier(&grid, 1.3, false).unwrap().tabulate(&grid).unwrap();
        let mean = complex_mean_multiplier(&grid, 1.3, 0.0).unwrap().tabulate(&grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 20 {
            let idx = rng.gen_range(0..grid.len());
            let s = sphere.samples()[idx].re;
            if s.abs() < 1e-3 {
                continue;
            }
            assert!((mean.samples()[idx].re / s - 0.5).abs() < 1e-10);
            checked += 1;
        }
    }

    #[test]
    fn invalid_means_are_rejected() {
        let grid = GridSpec::new(2, 16, 8.0).unwrap();
        assert!(complex_mean_multiplier(&grid, 1.0, -0.5).is_err());
        assert!(complex_mean_multiplier(&grid, 1.0, 0.0).is_ok());
        assert!(spherical_multiplier(&grid, 0.0, true).is_err());
        let grid3 = GridSpec::new(3, 8, 8.0).unwrap();
        assert!(complex_mean_multiplier(&grid3, 1.0, -0.5).is_ok());
        assert!(complex_mean_multiplier(&grid3, 1.0, -0.6).is_err());
    }

    #[test]
    fn normalized_sphere_is_one_at_origin() {
        let grid = GridSpec::new(3, 8, 8.0).unwrap();
        let m = spherical_multiplier(&grid, 2.0, true).unwrap().tabulate(&grid).unwrap();
        assert!((m.samples()[0].re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn tabulated_partition_sums_to_one() {
        let grid = GridSpec::new(2, 64, 8.0).unwrap();
        let lp = littlewood_paley(&grid).unwrap();
        for idx in 0..grid.len() {
            let r = norm(&grid.frequency(idx)[..2]);
            let total: f64 = lp.pieces.iter().map(|f| f.samples()[idx].re).sum();
            if r >= 1.0 {
                assert!((total - 1.0).abs() < 1e-12);
            }
            let q = lp.low.samples()[idx].re;
            if r <= 2.0 {
                assert_eq!(q, 1.0);
            }
            if r >= 4.0 {
                assert_eq!(q, 0.0);
            }
        }
    }

    #[test]
    fn propagator_table_has_unit_modulus() {
        let grid = GridSpec::new(2, 16, 8.0).unwrap();
        let spec = MultiplierSpec::Propagator {
            phase: PhaseSpec::euclidean(2).unwrap(),
            amplitude: AmplitudeSpec::one(),
            time: 0.7,
        };
        let t = spec.tabulate(&grid).unwrap();
        for (idx, z) in t.samples().iter().enumerate() {
            assert!((z.norm() - 1.0).abs() < 1e-14);
            let xi = grid.frequency(idx);
            let want = 0.7 * norm(&xi[..2]);
            assert!((z.arg() - want.sin().atan2(want.cos())).abs() < 1e-9);
        }
    }
}
