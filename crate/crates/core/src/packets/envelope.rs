//! Radial packet envelope `psi` with compactly supported, nonnegative transform
//! `psi^(eta) = exp(a - a / (1 - |eta|^2 / c^2))` for `|eta| < c`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::symbols::{sphere_area, sphere_transform};

/// Nodes per quadrature panel.
const PANEL_NODES: usize = 24;
/// Tail table resolution and reach, in units of `1 / c`.
const TAIL_STEP: f64 = 0.25;
const TAIL_REACH: f64 = 600.0;

fn panel_rule() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(PANEL_NODES.try_into().unwrap()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Envelope {
    /// Support radius `c` of the transform.
    pub radius: f64,
    /// Steepness `a`; larger values shorten the spatial tails.
    pub sharpness: f64,
}

impl Default for Envelope {
    fn default() -> Self {
        Self {
            radius: Self::DEFAULT_RADIUS,
            sharpness: Self::DEFAULT_SHARPNESS,
        }
    }
}

impl Envelope {
    pub const DEFAULT_RADIUS: f64 = 0.125;
    pub const DEFAULT_SHARPNESS: f64 = 16.0;

    /// Radius must lie in `(0, 1/2]` so packets stay inside their dyadic shell.
    pub fn new(radius: f64, sharpness: f64) -> Result<Self> {
        let env = Self { radius, sharpness };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius <= 0.5) {
            return invalid(format!("envelope radius {} must lie in (0, 1/2]", self.radius));
        }
        if !(self.sharpness > 0.0 && self.sharpness.is_finite()) {
            return invalid(format!("envelope sharpness {} must be positive", self.sharpness));
        }
        Ok(())
    }

    /// `psi^` at radius `r`.
    pub fn spectrum(&self, r: f64) -> f64 {
        let u = r / self.radius;
        if u >= 1.0 {
            return 0.0;
        }
        let a = self.sharpness;
        (a - a / (1.0 - u * u)).exp()
    }

    /// `int |psi^(eta)| d eta` over `R^n`.
    pub fn spectrum_l1(&self, dim: usize) -> f64 {
        let width = 0.25 * self.radius;
        let total: f64 = (0..4)
            .map(|j| {
                let lo = j as f64 * width;
                panel_rule().integrate(lo, lo + width, |rho| {
                    self.spectrum(rho) * rho.powi(dim as i32 - 1)
                })
            })
            .sum();
        sphere_area(dim) * total
    }

    /// `psi(0) = (2 pi)^{-n} int psi^`.
    pub fn origin_value(&self, dim: usize) -> f64 {
        self.spectrum_l1(dim) / (2.0 * PI).powi(dim as i32)
    }

    /// `psi` at spatial radius `r`, by composite Gauss-Legendre quadrature of
    /// `(2 pi)^{-n} int_0^c psi^(rho) rho^{n-1} sigma^(r rho) d rho`.
    pub fn profile(&self, dim: usize, r: f64) -> Result<f64> {
        let c = self.radius;
        let panels = (r * c / 6.0).ceil() as usize + 2;
        let width = c / panels as f64;
        let gl = panel_rule();
        let mut total = 0.0;
        for j in 0..panels {
            let lo = j as f64 * width;
            let mut err = None;
            total += gl.integrate(lo, lo + width, |rho| {
                let s = sphere_transform(dim, r * rho).unwrap_or_else(|e| {
                    err = Some(e);
                    0.0
                });
                self.spectrum(rho) * rho.powi(dim as i32 - 1) * s
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
        Ok(total / (2.0 * PI).powi(dim as i32))
    }

    /// Smallest radius beyond which `|psi| <= tol psi(0)` on the tabulated range.
    pub fn extent(&self, dim: usize, tol: f64) -> Result<f64> {
        self.validate()?;
        if !(tol > 0.0 && tol < 1.0) {
            return invalid(format!("tail tolerance {tol} must lie in (0, 1)"));
        }
        let table = tail_table(dim, self.sharpness)?;
        let last = table.iter().rposition(|&v| v > tol).unwrap_or(0);
        if last + 1 >= table.len() {
            return invalid(format!("tail tolerance {tol} is below the tabulated range"));
        }
        Ok((last + 1) as f64 * TAIL_STEP / self.radius)
    }
}

/// `|psi(r)| / psi(0)` for the unit-radius envelope, cached per dimension and sharpness.
fn tail_table(dim: usize, sharpness: f64) -> Result<Arc<Vec<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (dim, sharpness.to_bits());
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let unit = Envelope {
        radius: 1.0,
        sharpness,
    };
    let peak = unit.profile(dim, 0.0)?;
    let count = (TAIL_REACH / TAIL_STEP) as usize + 1;
    let mut values = Vec::with_capacity(count);
    for j in 0..count {
        values.push((unit.profile(dim, j as f64 * TAIL_STEP)? / peak).abs());
    }
    let table = Arc::new(values);
    cache.lock().unwrap().insert(key, table.clone());
    Ok(table)
}
