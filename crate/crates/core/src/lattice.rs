//! Periodic lattices, sampled fields and the discrete Fourier transform.
//!
//! A [`GridSpec`] describes the torus `[0, L)^n` sampled at `N` points per axis,
//! `x_j = j h` with `h = L / N`. The dual lattice is `xi_m = xi_0 + 2 pi m / L`
//! with balanced indices `m` in `[-N/2, N/2)` and an optional carrier `xi_0`.
//!
//! Transforms use `f^(xi) = int f(x) e^{-i x.xi} dx`, discretised as
//! `f^ = h^n FFT(f)` and `f = L^{-n} IFFT(f^)`. With a carrier, space samples
//! store the demodulated values `e^{-i x.xi_0} f(x)`, so moduli and `L^p` norms
//! are unaffected while the spectrum sits at `xi_0 + 2 pi m / L`.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of points per axis.
pub const MIN_POINTS: usize = 8;
/// Smallest admissible box side length.
pub const MIN_BOX_LENGTH: f64 = 8.0;
/// Largest grid the CSV exporter accepts.
pub const CSV_MAX_POINTS: usize = 1 << 16;

const MAGIC: &[u8; 4] = b"FLDB";

/// Which side of the transform a field lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Space,
    Frequency,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Space => "space",
            Domain::Frequency => "frequency",
        }
    }

    fn tag(self) -> u32 {
        match self {
            Domain::Space => 0,
            Domain::Frequency => 1,
        }
    }
}

/// Tag used by the binary format for boolean masks.
pub(crate) const MASK_TAG: u32 = 2;

/// Uniform periodic grid on `[0, L)^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    points: usize,
    box_length: f64,
    carrier: [f64; 3],
}

impl GridSpec {
    /// Validated grid with zero carrier.
    ///
    /// Requires `dim` in `{2, 3}`, `points` a power of two of at least 8 and a
    /// finite box length of at least 8.
    pub fn new(dim: usize, points: usize, box_length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{2, 3}}")));
        }
        if points < MIN_POINTS || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {points} must be a power of two >= {MIN_POINTS}"
            )));
        }
        if !box_length.is_finite() || box_length < MIN_BOX_LENGTH {
            return Err(Error::InvalidGrid(format!(
                "box length {box_length} must be finite and >= {MIN_BOX_LENGTH}"
            )));
        }
        if points.checked_pow(dim as u32).is_none() {
            return Err(Error::InvalidGrid("grid too large".into()));
        }
        Ok(Self {
            dim,
            points,
            box_length,
            carrier: [0.0; 3],
        })
    }

    /// Same lattice with the spectrum shifted to `carrier + 2 pi m / L`.
    pub fn with_carrier(mut self, carrier: &[f64]) -> Result<Self> {
        if carrier.len() != self.dim || carrier.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "carrier must have {} finite components",
                self.dim
            )));
        }
        self.carrier = [0.0; 3];
        self.carrier[..self.dim].copy_from_slice(carrier);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn carrier(&self) -> &[f64] {
        &self.carrier[..self.dim]
    }

    pub fn has_carrier(&self) -> bool {
        self.carrier.iter().any(|&c| c != 0.0)
    }

    /// Total number of lattice points, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spatial step `h = L / N`.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.points as f64
    }

    /// Dual step `2 pi / L`.
    pub fn frequency_spacing(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    /// Volume element `h^n` of the space lattice.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Volume element `(2 pi / L)^n` of the frequency lattice.
    pub fn frequency_cell(&self) -> f64 {
        self.frequency_spacing().powi(self.dim as i32)
    }

    /// Largest resolved offset from the carrier, `pi N / L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / self.box_length
    }

    /// Centre of the box, `L / 2` on every axis.
    pub fn center(&self) -> [f64; 3] {
        let c = 0.5 * self.box_length;
        let mut out = [0.0; 3];
        out[..self.dim].fill(c);
        out
    }

    /// Per-axis lattice indices of a flat index (last axis fastest).
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let n = self.points;
        let mut out = [0usize; 3];
        let mut rem = idx;
        for a in (0..self.dim).rev() {
            out[a] = rem % n;
            rem /= n;
        }
        out
    }

    /// Flat index of per-axis lattice indices.
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi[..self.dim]
            .iter()
            .fold(0usize, |acc, &i| acc * self.points + i)
    }

    /// Balanced integer frequency of a per-axis index.
    pub fn balanced(&self, i: usize) -> i64 {
        if i < self.points / 2 {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    /// Spatial position of a flat index.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let m = self.multi_index(idx);
        let mut out = [0.0; 3];
        for a in 0..self.dim {
            out[a] = m[a] as f64 * h;
        }
        out
    }

    /// Absolute frequency of a flat index, carrier included.
    pub fn frequency(&self, idx: usize) -> [f64; 3] {
        let dxi = self.frequency_spacing();
        let m = self.multi_index(idx);
        let mut out = [0.0; 3];
        for a in 0..self.dim {
            out[a] = self.carrier[a] + dxi * self.balanced(m[a]) as f64;
        }
        out
    }

    /// Frequency offset from the carrier of a flat index.
    pub fn offset(&self, idx: usize) -> [f64; 3] {
        let dxi = self.frequency_spacing();
        let m = self.multi_index(idx);
        let mut out = [0.0; 3];
        for a in 0..self.dim {
            out[a] = dxi * self.balanced(m[a]) as f64;
        }
        out
    }

    /// True when some axis sits on the unpaired Nyquist index `N / 2`.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let m = self.multi_index(idx);
        m[..self.dim].contains(&(self.points / 2))
    }

    /// True when a point lies on the face `x_a = 0` of some axis.
    pub fn is_boundary(&self, idx: usize) -> bool {
        let m = self.multi_index(idx);
        m[..self.dim].contains(&0)
    }

    /// Modulation factor `e^{i x.xi_0}` at a flat index.
    pub fn modulation(&self, idx: usize) -> Complex64 {
        if !self.has_carrier() {
            return Complex64::new(1.0, 0.0);
        }
        let x = self.position(idx);
        let phase: f64 = (0..self.dim).map(|a| x[a] * self.carrier[a]).sum();
        Complex64::from_polar(1.0, phase)
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Multi-dimensional complex FFT bound to one grid shape.
///
/// `forward` applies `h^n FFT`, `inverse` applies `L^{-n} IFFT`.
pub struct FftEngine {
    dim: usize,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    forward_scale: f64,
    inverse_scale: f64,
    scratch: Vec<Complex64>,
    lines: Vec<Complex64>,
}

impl FftEngine {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            dim: grid.dim(),
            n,
            fwd,
            inv,
            forward_scale: grid.cell_volume(),
            inverse_scale: grid.box_length().powi(grid.dim() as i32).recip(),
            scratch: vec![Complex64::default(); scratch_len],
            lines: Vec::new(),
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        let fft = Arc::clone(&self.fwd);
        self.transform(fft.as_ref(), data);
        let s = self.forward_scale;
        data.iter_mut().for_each(|z| *z *= s);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        let fft = Arc::clone(&self.inv);
        self.transform(fft.as_ref(), data);
        let s = self.inverse_scale;
        data.iter_mut().for_each(|z| *z *= s);
    }

    fn transform(&mut self, fft: &dyn Fft<f64>, data: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(data.len(), n.pow(self.dim as u32));
        // last axis is contiguous
        fft.process_with_scratch(data, &mut self.scratch);
        for axis in 0..self.dim - 1 {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let outer = data.len() / (n * stride);
            let batch = stride.min((1 << 15) / n).max(1);
            self.lines.resize(batch * n, Complex64::default());
            for o in 0..outer {
                let base = o * n * stride;
                let mut r0 = 0;
                while r0 < stride {
                    let b = batch.min(stride - r0);
                    for j in 0..n {
                        let src = base + j * stride + r0;
                        for k in 0..b {
                            self.lines[k * n + j] = data[src + k];
                        }
                    }
                    fft.process_with_scratch(&mut self.lines[..b * n], &mut self.scratch);
                    for j in 0..n {
                        let dst = base + j * stride + r0;
                        for k in 0..b {
                            data[dst + k] = self.lines[k * n + j];
                        }
                    }
                    r0 += b;
                }
            }
        }
    }
}

/// Complex samples on a grid, tagged with their domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    domain: Domain,
    samples: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: GridSpec, domain: Domain, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            domain,
            samples,
        })
    }

    pub fn zeros(grid: GridSpec, domain: Domain) -> Self {
        Self {
            grid,
            domain,
            samples: vec![Complex64::default(); grid.len()],
        }
    }

    /// Samples a function of position. With a carrier the stored values are
    /// demodulated by `e^{-i x.xi_0}`.
    pub fn from_space_fn(grid: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let dim = grid.dim();
        let samples = (0..grid.len())
            .map(|idx| {
                let x = grid.position(idx);
                f(&x[..dim]) * grid.modulation(idx).conj()
            })
            .collect();
        Self {
            grid,
            domain: Domain::Space,
            samples,
        }
    }

    /// Samples a function of absolute frequency on the dual lattice.
    pub fn from_frequency_fn(grid: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let dim = grid.dim();
        let samples = (0..grid.len())
            .map(|idx| {
                let xi = grid.frequency(idx);
                f(&xi[..dim])
            })
            .collect();
        Self {
            grid,
            domain: Domain::Frequency,
            samples,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Field value at a flat index with the carrier restored.
    pub fn value(&self, idx: usize) -> Complex64 {
        match self.domain {
            Domain::Space => self.samples[idx] * self.grid.modulation(idx),
            Domain::Frequency => self.samples[idx],
        }
    }

    pub fn expect_domain(&self, domain: Domain) -> Result<()> {
        if self.domain != domain {
            return Err(Error::DomainMismatch {
                expected: domain.name(),
                found: self.domain.name(),
            });
        }
        Ok(())
    }

    /// `f^ = h^n FFT(f)`.
    pub fn forward(&self) -> Result<Field> {
        self.expect_domain(Domain::Space)?;
        let mut samples = self.samples.clone();
        FftEngine::new(&self.grid).forward(&mut samples);
        Ok(Field {
            grid: self.grid,
            domain: Domain::Frequency,
            samples,
        })
    }

    /// `f = L^{-n} IFFT(f^)`.
    pub fn inverse(&self) -> Result<Field> {
        self.expect_domain(Domain::Frequency)?;
        let mut samples = self.samples.clone();
        FftEngine::new(&self.grid).inverse(&mut samples);
        Ok(Field {
            grid: self.grid,
            domain: Domain::Space,
            samples,
        })
    }

    /// Pointwise linear combination `self + c * other` on the same grid and domain.
    pub fn add_scaled(&self, c: Complex64, other: &Field) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        other.expect_domain(self.domain)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Field {
            grid: self.grid,
            domain: self.domain,
            samples,
        })
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        Field {
            grid: self.grid,
            domain: self.domain,
            samples: self.samples.iter().map(|z| z * c).collect(),
        }
    }

    /// Discrete `L^p` norm; see [`lp_norm`].
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }

    /// Largest modulus.
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Writes the binary field format.
    ///
    /// Layout: magic `FLDB`, then little-endian `u32` dimension, `u32` points
    /// per axis, `u32` domain tag, `f64` box length and eight zero bytes,
    /// followed by `N^n` pairs of `f64` real and imaginary parts.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        if self.grid.has_carrier() {
            return Err(Error::Format(
                "fields on carrier-shifted grids cannot be serialised".into(),
            ));
        }
        write_header(&mut w, &self.grid, self.domain.tag())?;
        let mut buf = Vec::with_capacity(self.samples.len() * 16);
        for z in &self.samples {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Field> {
        let (grid, tag) = read_header(&mut r)?;
        let domain = match tag {
            0 => Domain::Space,
            1 => Domain::Frequency,
            t => return Err(Error::Format(format!("domain tag {t} is not a field"))),
        };
        let mut buf = vec![0u8; grid.len() * 16];
        r.read_exact(&mut buf)?;
        let samples = buf
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Field::new(grid, domain, samples)
    }

    /// CSV export with columns `x1,x2[,x3],re,im` (`xi1..` in frequency).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if self.grid.len() > CSV_MAX_POINTS {
            return Err(Error::Format(format!(
                "CSV export limited to {CSV_MAX_POINTS} points"
            )));
        }
        let dim = self.grid.dim();
        let prefix = match self.domain {
            Domain::Space => "x",
            Domain::Frequency => "xi",
        };
        let mut header: Vec<String> = (1..=dim).map(|a| format!("{prefix}{a}")).collect();
        header.push("re".into());
        header.push("im".into());
        writeln!(w, "{}", header.join(","))?;
        for idx in 0..self.grid.len() {
            let coords = match self.domain {
                Domain::Space => self.grid.position(idx),
                Domain::Frequency => self.grid.frequency(idx),
            };
            let z = self.value(idx);
            let mut cells: Vec<String> = coords[..dim].iter().map(|c| c.to_string()).collect();
            cells.push(z.re.to_string());
            cells.push(z.im.to_string());
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn write_header<W: Write>(w: &mut W, grid: &GridSpec, tag: u32) -> Result<()> {
    let mut head = Vec::with_capacity(32);
    head.extend_from_slice(MAGIC);
    head.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    head.extend_from_slice(&(grid.points() as u32).to_le_bytes());
    head.extend_from_slice(&tag.to_le_bytes());
    head.extend_from_slice(&grid.box_length().to_le_bytes());
    head.extend_from_slice(&0u64.to_le_bytes());
    w.write_all(&head)?;
    Ok(())
}

pub(crate) fn read_header<R: Read>(r: &mut R) -> Result<(GridSpec, u32)> {
    let mut head = [0u8; 32];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(head[i..i + 4].try_into().unwrap());
    let dim = word(4) as usize;
    let points = word(8) as usize;
    let tag = word(12);
    let box_length = f64::from_le_bytes(head[16..24].try_into().unwrap());
    if head[24..].iter().any(|&b| b != 0) {
        return Err(Error::Format("reserved header bytes must be zero".into()));
    }
    let grid = GridSpec::new(dim, points, box_length).map_err(|e| Error::Format(e.to_string()))?;
    Ok((grid, tag))
}

/// Unitary-convention forward transform; see [`Field::forward`].
pub fn dft_forward(f: &Field) -> Result<Field> {
    f.forward()
}

/// Inverse of [`dft_forward`].
pub fn dft_inverse(g: &Field) -> Result<Field> {
    g.inverse()
}

/// `(sum |f|^p h^n)^{1/p}` for finite `p >= 1`, the largest modulus for `p = inf`.
///
/// Only space-domain fields are accepted.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    f.expect_domain(Domain::Space)?;
    lp_norm_of_moduli(f.samples().iter().map(|z| z.norm()), f.grid().cell_volume(), p)
}

/// Discrete `L^p` norm of precomputed moduli with cell volume `cell`.
pub fn lp_norm_of_moduli(
    moduli: impl Iterator<Item = f64>,
    cell: f64,
    p: f64,
) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(moduli.fold(0.0, f64::max));
    }
    let sum: f64 = if p == 2.0 {
        moduli.map(|m| m * m).sum()
    } else if p == 1.0 {
        moduli.sum()
    } else {
        moduli.map(|m| m.powf(p)).sum()
    };
    Ok((sum * cell).powf(1.0 / p))
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("exponent {p} must be >= 1")));
    }
    Ok(())
}
