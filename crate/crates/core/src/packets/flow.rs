//! Flow residual `r(t) = sup_x |e^{it phi(D)} f(x) - f(x + t grad phi(nu))|` of a
//! packet concentrated near direction `nu`, and the constant `C` in
//! `r(t) <= C (2 pi)^{-n} ||f^||_1 |t| (1 + gamma)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::lattice::{Domain, FftEngine, Field};
use crate::symbols::{dot, norm, PhaseSpec};

/// Spectral samples below this fraction of the peak are treated as outside the support.
const SUPPORT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResidual {
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `int |f^| d xi` as a lattice sum.
    pub spectrum_l1: f64,
    /// `sup |xi/|xi| - nu|^2 |xi|` over the spectral support.
    pub gamma: f64,
    /// Smallest `C` with `r(t) <= C (2 pi)^{-n} ||f^||_1 |t| (1 + gamma)` at every sampled `t != 0`.
    pub constant: f64,
}

impl FlowResidual {
    /// `C (2 pi)^{-n} ||f^||_1 |t| (1 + gamma)` with the fitted constant.
    pub fn bound(&self, dim: usize, t: f64) -> f64 {
        self.constant * self.scale(dim) * t.abs()
    }

    fn scale(&self, dim: usize) -> f64 {
        self.spectrum_l1 / (2.0 * PI).powi(dim as i32) * (1.0 + self.gamma)
    }
}

pub fn flow_residual(
    f: &Field,
    direction: &[f64],
    phase: &PhaseSpec,
    t_list: &[f64],
) -> Result<FlowResidual> {
    f.expect_domain(Domain::Space)?;
    let grid = *f.grid();
    let dim = grid.dim();
    if direction.len() != dim || (norm(direction) - 1.0).abs() > 1e-9 {
        return invalid("flow direction must be a unit vector of the grid dimension");
    }
    if phase.dim() != dim {
        return invalid("phase dimension differs from grid dimension");
    }
    phase.validate()?;
    if t_list.iter().any(|t| !t.is_finite()) {
        return invalid("flow times must be finite");
    }
    let v = phase.gradient(direction);
    let spec = f.forward()?;
    let peak = spec.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut idx = Vec::new();
    let mut coeffs = Vec::new();
    let mut gamma: f64 = 0.0;
    let mut l1 = 0.0;
    for (i, z) in spec.samples().iter().enumerate() {
        if z.norm() <= SUPPORT_FLOOR * peak || grid.is_nyquist(i) {
            continue;
        }
        let xi = grid.frequency(i);
        let r = norm(&xi[..dim]);
        if r > 0.0 {
            let d: f64 = (0..dim).map(|a| (xi[a] / r - direction[a]).powi(2)).sum();
            gamma = gamma.max(d * r);
        }
        l1 += z.norm();
        idx.push(i);
        coeffs.push(*z);
    }
    l1 *= grid.frequency_cell();
    let phis: Vec<f64> = idx.iter().map(|&i| phase.eval(&grid.frequency(i)[..dim])).collect();
    let shifts: Vec<f64> = idx
        .iter()
        .map(|&i| dot(&grid.frequency(i)[..dim], &v[..dim]))
        .collect();
    let mut engine = FftEngine::new(&grid);
    let mut buf = vec![Complex64::default(); grid.len()];
    let mut residuals = Vec::with_capacity(t_list.len());
    for &t in t_list {
        buf.fill(Complex64::default());
        for (j, &i) in idx.iter().enumerate() {
            let diff = Complex64::from_polar(1.0, t * phis[j]) - Complex64::from_polar(1.0, t * shifts[j]);
            buf[i] = coeffs[j] * diff;
        }
        engine.inverse(&mut buf);
        residuals.push(buf.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let scale = l1 / (2.0 * PI).powi(dim as i32) * (1.0 + gamma);
    let constant = t_list
        .iter()
        .zip(&residuals)
        .filter(|(t, _)| **t != 0.0)
        .map(|(t, r)| r / (scale * t.abs()))
        .fold(0.0, f64::max);
    Ok(FlowResidual {
        times: t_list.to_vec(),
        residuals,
        spectrum_l1: l1,
        gamma,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packets::{make_packet, packet_grid, Envelope, GridPolicy, WavePacketSpec};

    fn packet(k: u32) -> Field {
        let g = packet_grid(2, k, &[[1.0, 0.0, 0.0]], &[1.0, 0.0], &Envelope::default(), 0.1, &GridPolicy::default()).unwrap();
        make_packet(&g, &WavePacketSpec::new(2, k, &[1.0, 0.0]).unwrap()).unwrap()
    }

    #[test]
    fn residual_vanishes_at_time_zero() {
        let f = packet(4);
        let res = flow_residual(&f, &[1.0, 0.0], &PhaseSpec::euclidean(2).unwrap(), &[0.0, 0.05]).unwrap();
        assert_eq!(res.residuals[0], 0.0);
        assert!(res.residuals[1] > 0.0);
        assert!(res.residuals[1] <= res.bound(2, 0.05) * (1.0 + 1e-12));
    }

    #[test]
    fn residual_grows_linearly_for_small_times() {
        let f = packet(5);
        let phase = PhaseSpec::euclidean(2).unwrap();
        let a = flow_residual(&f, &[1.0, 0.0], &phase, &[0.01]).unwrap();
        let b = flow_residual(&f, &[1.0, 0.0], &phase, &[0.02]).unwrap();
        let ratio = b.residuals[0] / a.residuals[0];
        assert!((ratio - 2.0).abs() < 0.05, "residual is not linear in t: {ratio}");
    }

    #[test]
    fn gamma_is_bounded_by_the_support_geometry() {
        let c = Envelope::default().radius;
        for k in [3, 5, 7] {
            let res = flow_residual(&packet(k), &[1.0, 0.0], &PhaseSpec::euclidean(2).unwrap(), &[0.05]).unwrap();
            assert!(res.gamma <= 4.0 * c * c, "k={k}: gamma = {}", res.gamma);
        }
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let f = packet(3);
        let phase = PhaseSpec::euclidean(2).unwrap();
        assert!(flow_residual(&f, &[1.0, 1.0], &phase, &[0.1]).is_err());
        assert!(flow_residual(&f, &[1.0, 0.0], &PhaseSpec::zero(2).unwrap(), &[0.1]).is_err());
        assert!(flow_residual(&f, &[1.0, 0.0], &phase, &[f64::NAN]).is_err());
    }
}
