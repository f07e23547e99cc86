//! The `phi_omega` family and the two Hardy-space norm estimators.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use super::frame::{fibonacci_sphere, FramePartition};
use crate::error::{invalid, Error, Result};
use crate::lattice::{check_exponent, Domain, FftEngine, Field, GridSpec};
use crate::symbols::{lp_low, norm, smooth_step, sobolev_weight};

/// Largest relative spectral energy allowed outside `[2^{k-1}, 2^{k+1}]`
/// for the packet estimator.
pub const SHELL_LEAKAGE_TOLERANCE: f64 = 1e-8;

const SPECTRAL_FLOOR: f64 = 1e-14;
const TABLE_NODES: usize = 2049;
const W_MAX: f64 = 4.0;

/// Angular bump `g(u)`: 1 for `u <= 1/2`, 0 for `u >= 1`.
#[inline]
fn bump(u: f64) -> f64 {
    smooth_step(2.0 - 2.0 * u)
}

/// Radial switch-on: 0 for `rho <= 1/4`, 1 for `rho >= 1`.
#[inline]
fn switch_on(rho: f64) -> f64 {
    smooth_step((rho - 0.25) / 0.75)
}

fn gauss() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(400.try_into().unwrap()))
}

/// Planar normaliser `I(w) = int_0^1 g(u)^2 / sqrt(1 - w u^2 / 4) du` and its
/// derivative in `w`, by Gauss-Legendre quadrature. The bump vanishes to all
/// orders at `u = 1`, so the endpoint singularity at `w = 4` is harmless.
fn planar_integral(w: f64) -> (f64, f64) {
    let gl = gauss();
    let val = gl.integrate(0.0, 1.0, |u| {
        let g = bump(u);
        g * g / (1.0 - 0.25 * w * u * u).max(1e-300).sqrt()
    });
    let der = gl.integrate(0.0, 1.0, |u| {
        let g = bump(u);
        let q = (1.0 - 0.25 * w * u * u).max(1e-300);
        g * g * 0.125 * u * u / (q * q.sqrt())
    });
    (val, der)
}

struct PlanarTable {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

fn planar_table() -> &'static PlanarTable {
    static T: OnceLock<PlanarTable> = OnceLock::new();
    T.get_or_init(|| {
        let step = W_MAX / (TABLE_NODES - 1) as f64;
        let (values, slopes) = (0..TABLE_NODES)
            .map(|i| planar_integral(i as f64 * step))
            .unzip();
        PlanarTable {
            step,
            values,
            slopes,
        }
    })
}

impl PlanarTable {
    fn eval(&self, w: f64) -> f64 {
        let s = (w / self.step).clamp(0.0, (TABLE_NODES - 1) as f64);
        let i = (s as usize).min(TABLE_NODES - 2);
        let t = s - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1
    }
}

fn spherical_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        gauss().integrate(0.0, 1.0, |u| {
            let g = bump(u);
            g * g * u
        })
    })
}

/// `N(rho) = int_{S^{n-1}} g(sqrt(rho) |xi^ - omega|)^2 d omega` for `rho >= 1/4`.
pub fn phi_normalizer(dim: usize, rho: f64) -> Result<f64> {
    if !(rho >= 0.25) || !rho.is_finite() {
        return invalid(format!("normaliser needs rho >= 1/4, got {rho}"));
    }
    match dim {
        2 => Ok(2.0 / rho.sqrt() * planar_table().eval(1.0 / rho)),
        3 => Ok(TAU / rho * spherical_constant()),
        _ => invalid(format!("dimension {dim} not in {{2, 3}}")),
    }
}

/// Direct quadrature of the planar normaliser, bypassing the table.
#[cfg(test)]
pub(crate) fn phi_normalizer_direct(rho: f64) -> f64 {
    2.0 / rho.sqrt() * planar_integral(1.0 / rho).0
}

/// Radial factor `r(rho) / sqrt(N(rho))`, zero where `r` vanishes.
#[inline]
fn radial_factor(dim: usize, rho: f64) -> f64 {
    let r = switch_on(rho);
    if r == 0.0 {
        0.0
    } else {
        r / phi_normalizer(dim, rho).expect("rho above 1/4").sqrt()
    }
}

/// `phi_omega(xi) = r(|xi|) g(|xi|^{1/2} |xi^ - omega|) / sqrt(N(|xi|))`.
///
/// For `|xi| >= 1` the squares integrate to 1 over `omega`.
pub fn phi_omega(xi: &[f64], omega: &[f64]) -> f64 {
    let dim = xi.len();
    let rho = norm(xi);
    let rf = radial_factor(dim, rho);
    if rf == 0.0 {
        return 0.0;
    }
    let c: f64 = (0..dim)
        .map(|a| (xi[a] / rho - omega[a]).powi(2))
        .sum::<f64>()
        .sqrt();
    rf * bump(rho.sqrt() * c)
}

/// Directions and weights for integrating over the sphere with the given chord spacing.
pub fn quadrature_directions(dim: usize, spacing: f64) -> Result<(Vec<[f64; 3]>, Vec<f64>)> {
    if !(spacing > 0.0) {
        return invalid("direction spacing must be positive");
    }
    match dim {
        2 => {
            let m = ((TAU / spacing).ceil() as usize).max(8);
            let dirs = (0..m)
                .map(|j| {
                    let a = TAU * j as f64 / m as f64;
                    [a.cos(), a.sin(), 0.0]
                })
                .collect();
            Ok((dirs, vec![TAU / m as f64; m]))
        }
        3 => {
            let m = ((4.0 * PI / (spacing * spacing)).ceil() as usize).max(32);
            Ok((fibonacci_sphere(m), vec![4.0 * PI / m as f64; m]))
        }
        _ => invalid(format!("dimension {dim} not in {{2, 3}}")),
    }
}

/// Spectrum restricted to its significant, non-Nyquist samples.
struct Sparse {
    grid: GridSpec,
    idx: Vec<usize>,
    coeffs: Vec<Complex64>,
}

impl Sparse {
    fn new(f: &Field, s: f64) -> Result<Self> {
        f.expect_domain(Domain::Space)?;
        let grid = *f.grid();
        let dim = grid.dim();
        let spec = f.forward()?;
        let peak = spec.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let floor = peak * SPECTRAL_FLOOR;
        let mut idx = Vec::new();
        let mut coeffs = Vec::new();
        for (i, z) in spec.samples().iter().enumerate() {
            if peak > 0.0 && z.norm() > floor && !grid.is_nyquist(i) {
                idx.push(i);
                let xi = grid.frequency(i);
                coeffs.push(z * sobolev_weight(&xi[..dim], s));
            }
        }
        Ok(Self { grid, idx, coeffs })
    }
}

/// Accumulates `sum |g|^p h^n` (or `max |g|` for `p = inf`) of inverse transforms
/// of sparse spectra.
struct PieceNorms {
    engine: FftEngine,
    buffer: Vec<Complex64>,
    p: f64,
    cell: f64,
}

impl PieceNorms {
    fn new(grid: &GridSpec, p: f64) -> Self {
        Self {
            engine: FftEngine::new(grid),
            buffer: vec![Complex64::default(); grid.len()],
            p,
            cell: grid.cell_volume(),
        }
    }

    /// `||g||_p^p`, or `||g||_inf` when `p` is infinite.
    fn power(&mut self, entries: impl Iterator<Item = (usize, Complex64)>) -> f64 {
        self.buffer.fill(Complex64::default());
        for (i, v) in entries {
            self.buffer[i] = v;
        }
        self.engine.inverse(&mut self.buffer);
        let p = self.p;
        if p.is_infinite() {
            self.buffer.iter().map(|z| z.norm()).fold(0.0, f64::max)
        } else if p == 2.0 {
            self.buffer.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell
        } else {
            self.buffer.iter().map(|z| z.norm_sqr().powf(0.5 * p)).sum::<f64>() * self.cell
        }
    }
}

/// `||<D>^s f||_p`.
pub fn sobolev_norm(f: &Field, s: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let sp = Sparse::new(f, s)?;
    let mut pieces = PieceNorms::new(&sp.grid, p);
    let v = pieces.power(sp.idx.iter().copied().zip(sp.coeffs.iter().copied()));
    Ok(if p.is_infinite() { v } else { v.powf(1.0 / p) })
}

/// Tuning knobs of the quadrature estimator.
#[derive(Debug, Clone, Copy)]
pub struct HpfioOptions {
    /// Direction spacing as a multiple of `2^{-K/2}`, `K = ceil(log2 max|xi|)`.
    pub spacing_factor: f64,
}

impl Default for HpfioOptions {
    fn default() -> Self {
        Self {
            spacing_factor: 0.5,
        }
    }
}

/// Quadrature estimate of `||f||_{H^{s,p}_{FIO}}`; see the module docs.
pub fn hpfio_norm_quadrature(f: &Field, s: f64, p: f64) -> Result<f64> {
    hpfio_norm_quadrature_with(f, s, p, HpfioOptions::default())
}

pub(crate) fn hpfio_norm_quadrature_with(
    f: &Field,
    s: f64,
    p: f64,
    opts: HpfioOptions,
) -> Result<f64> {
    check_exponent(p)?;
    let sp = Sparse::new(f, s)?;
    let grid = sp.grid;
    let dim = grid.dim();
    let mut pieces = PieceNorms::new(&grid, p);
    let finish = |v: f64| if p.is_infinite() { v } else { v.powf(1.0 / p) };
    if sp.idx.is_empty() {
        return Ok(0.0);
    }

    let freqs: Vec<[f64; 3]> = sp.idx.iter().map(|&i| grid.frequency(i)).collect();
    let radii: Vec<f64> = freqs.iter().map(|xi| norm(&xi[..dim])).collect();

    let low: Vec<(usize, Complex64)> = sp
        .idx
        .iter()
        .zip(&sp.coeffs)
        .zip(&radii)
        .filter_map(|((&i, c), &r)| {
            let q = lp_low(r);
            (q != 0.0).then(|| (i, c * q))
        })
        .collect();
    let low_norm = if low.is_empty() {
        0.0
    } else {
        finish(pieces.power(low.into_iter()))
    };

    // points where some phi_omega can be nonzero
    struct Pt {
        slot: usize,
        unit: [f64; 3],
        sqrt_rho: f64,
        factor: f64,
        angle: f64,
    }
    let mut pts: Vec<Pt> = Vec::new();
    for (slot, (xi, &r)) in freqs.iter().zip(&radii).enumerate() {
        let factor = radial_factor(dim, r);
        if factor == 0.0 {
            continue;
        }
        let unit = [xi[0] / r, xi[1] / r, xi[2] / r];
        pts.push(Pt {
            slot,
            unit,
            sqrt_rho: r.sqrt(),
            factor,
            angle: unit[1].atan2(unit[0]).rem_euclid(TAU),
        });
    }
    if pts.is_empty() {
        return Ok(low_norm);
    }
    let rmax = radii.iter().cloned().fold(0.0, f64::max);
    let top = rmax.max(1.0).log2().ceil();
    let spacing = opts.spacing_factor * (-top / 2.0).exp2();
    let (dirs, weights) = quadrature_directions(dim, spacing)?;

    // angular reach of the widest bump
    let min_sqrt = pts.iter().map(|p| p.sqrt_rho).fold(f64::INFINITY, f64::min);
    let reach_chord = (1.0 / min_sqrt).min(2.0);
    let reach_angle = 2.0 * (0.5 * reach_chord).asin() + 1e-12;

    if dim == 2 {
        pts.sort_by(|a, b| a.angle.partial_cmp(&b.angle).unwrap());
    }
    let angles: Vec<f64> = pts.iter().map(|p| p.angle).collect();

    let mut acc = 0.0f64;
    let mut entries: Vec<(usize, Complex64)> = Vec::new();
    for (omega, w) in dirs.iter().zip(&weights) {
        entries.clear();
        let mut visit = |pt: &Pt| {
            let c = ((pt.unit[0] - omega[0]).powi(2)
                + (pt.unit[1] - omega[1]).powi(2)
                + (pt.unit[2] - omega[2]).powi(2))
            .sqrt();
            let g = bump(pt.sqrt_rho * c);
            if g != 0.0 {
                entries.push((sp.idx[pt.slot], sp.coeffs[pt.slot] * (pt.factor * g)));
            }
        };
        if dim == 2 && reach_angle < PI {
            let a0 = omega[1].atan2(omega[0]).rem_euclid(TAU);
            let lo = a0 - reach_angle;
            let hi = a0 + reach_angle;
            let mut scan = |from: f64, to: f64| {
                let start = angles.partition_point(|&a| a < from);
                let end = angles.partition_point(|&a| a <= to);
                for pt in &pts[start..end] {
                    visit(pt);
                }
            };
            if lo < 0.0 {
                scan(lo + TAU, TAU);
                scan(0.0, hi);
            } else if hi >= TAU {
                scan(lo, TAU);
                scan(0.0, hi - TAU);
            } else {
                scan(lo, hi);
            }
        } else {
            for pt in &pts {
                let dot = pt.unit[0] * omega[0] + pt.unit[1] * omega[1] + pt.unit[2] * omega[2];
                if 2.0 - 2.0 * dot <= reach_chord * reach_chord {
                    visit(pt);
                }
            }
        }
        if entries.is_empty() {
            continue;
        }
        let v = pieces.power(entries.iter().copied());
        if p.is_infinite() {
            acc = acc.max(v);
        } else {
            acc += w * v;
        }
    }
    Ok(low_norm + finish(acc))
}

/// Packet estimate for data supported in the dyadic shell `k`; see the module docs.
///
/// Errors with [`Error::Support`] if more than [`SHELL_LEAKAGE_TOLERANCE`] of
/// the spectral energy lies outside `[2^{k-1}, 2^{k+1}]`.
pub fn hpfio_norm_packet(f: &Field, s: f64, p: f64, k: u32) -> Result<f64> {
    check_exponent(p)?;
    let sp = Sparse::new(f, 0.0)?;
    let grid = sp.grid;
    let dim = grid.dim();
    let lo = (k as f64 - 1.0).exp2();
    let hi = (k as f64 + 1.0).exp2();
    let mut total = 0.0;
    let mut outside = 0.0;
    for (&i, c) in sp.idx.iter().zip(&sp.coeffs) {
        let r = norm(&grid.frequency(i)[..dim]);
        let e = c.norm_sqr();
        total += e;
        if r < lo || r > hi {
            outside += e;
        }
    }
    if total == 0.0 {
        return Ok(0.0);
    }
    if outside > SHELL_LEAKAGE_TOLERANCE * total {
        return Err(Error::Support(format!(
            "{:.3e} of the spectral energy lies outside shell {k}",
            outside / total
        )));
    }
    let frame = FramePartition::new(dim, k)?;
    let mut lists: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); frame.directions().len()];
    let mut vals = Vec::new();
    for (&i, c) in sp.idx.iter().zip(&sp.coeffs) {
        frame.values(&grid.frequency(i)[..dim], &mut vals);
        for &(nu, chi) in &vals {
            lists[nu].push((i, c * chi));
        }
    }
    let mut pieces = PieceNorms::new(&grid, p);
    let mut acc = 0.0f64;
    for list in lists.iter().filter(|l| !l.is_empty()) {
        let v = pieces.power(list.iter().copied());
        if p.is_infinite() {
            acc = acc.max(v);
        } else {
            acc += v;
        }
    }
    let sum = if p.is_infinite() { acc } else { acc.powf(1.0 / p) };
    let recip = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let kf = k as f64;
    Ok((kf * s).exp2() * (kf * 0.5 * (dim as f64 - 1.0) * (0.5 - recip)).exp2() * sum)
}
