//! Fixed-time operators `e^{it phi(D)} a(tD)`, spherical and complex means,
//! and their maximal functions over sampled time intervals.
//!
//! Time sampling obeys the resolution rule `dt <= c0 2^{-k_top}` with
//! `c0 = 1/4` and `k_top = ceil(log2 max|xi|) - 1` taken over the frequencies
//! carrying the data. Violations are errors, never silent.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::lattice::{lp_norm_of_moduli, Domain, FftEngine, Field, GridSpec};
use crate::specfun::RadialProfile;
use crate::symbols::{
    complex_mean_order, complex_mean_symbol, sphere_area, sphere_transform, AmplitudeSpec,
    MultiplierSpec, PhaseSpec,
};

/// Constant `c0` of the resolution rule.
pub const TIME_RESOLUTION: f64 = 0.25;

/// Spectral samples below this fraction of the peak modulus are ignored when
/// locating the top shell.
const SPECTRAL_FLOOR: f64 = 1e-14;

/// Phase-stepping products are re-anchored to exact values this often.
const REANCHOR: usize = 64;

/// Uniformly sampled interval `[t_min, t_max]` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    count: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !t_min.is_finite() || !t_max.is_finite() || t_min > t_max {
            return invalid(format!("time interval [{t_min}, {t_max}] is invalid"));
        }
        if count == 0 || (count == 1 && t_min != t_max) || (count > 1 && t_min == t_max) {
            return invalid(format!("{count} samples do not fit [{t_min}, {t_max}]"));
        }
        Ok(Self {
            t_min,
            t_max,
            count,
        })
    }

    /// Coarsest grid on `[t_min, t_max]` obeying the resolution rule for `k_top`.
    pub fn resolved(t_min: f64, t_max: f64, k_top: i32) -> Result<Self> {
        if t_min == t_max {
            return Self::new(t_min, t_max, 1);
        }
        let dt = max_time_step(k_top);
        let intervals = ((t_max - t_min) / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(t_min, t_max, intervals + 1)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        if self.count == 1 {
            0.0
        } else {
            (self.t_max - self.t_min) / (self.count - 1) as f64
        }
    }

    pub fn sample(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.t_max
        } else {
            self.t_min + i as f64 * self.spacing()
        }
    }

    pub fn samples(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.sample(i)).collect()
    }

    /// Same interval with every spacing halved.
    pub fn refined(&self) -> Self {
        if self.count == 1 {
            return *self;
        }
        Self {
            count: 2 * (self.count - 1) + 1,
            ..*self
        }
    }

    /// Errors unless the spacing obeys the resolution rule for `k_top`.
    pub fn check_resolution(&self, k_top: i32) -> Result<()> {
        let dt = max_time_step(k_top);
        if self.spacing() > dt * (1.0 + 1e-9) {
            return Err(Error::UnderResolved(format!(
                "time step {} exceeds {dt} required for shell {k_top}",
                self.spacing()
            )));
        }
        Ok(())
    }
}

/// Largest admissible time step `c0 2^{-k_top}`.
pub fn max_time_step(k_top: i32) -> f64 {
    TIME_RESOLUTION * (-(k_top.max(0)) as f64).exp2()
}

/// `ceil(log2 max|xi|) - 1` over frequencies carrying the data, or `None` for zero data.
pub fn top_shell(spectrum: &Field) -> Result<Option<i32>> {
    spectrum.expect_domain(Domain::Frequency)?;
    let grid = spectrum.grid();
    let peak = spectrum.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(None);
    }
    let floor = peak * SPECTRAL_FLOOR;
    let rmax = spectrum
        .samples()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > floor)
        .map(|(idx, _)| crate::symbols::norm(&grid.frequency(idx)[..grid.dim()]))
        .fold(0.0, f64::max);
    Ok(Some(shell_of_radius(rmax)))
}

pub(crate) fn shell_of_radius(r: f64) -> i32 {
    if r <= 1.0 {
        0
    } else {
        (r.log2().ceil() as i32 - 1).max(0)
    }
}

/// The operator families whose maximal functions are computed.
#[derive(Debug, Clone)]
pub enum MeanFamily {
    /// `e^{it phi(D)} a(tD)`; any real times.
    HalfWave {
        phase: PhaseSpec,
        amplitude: AmplitudeSpec,
    },
    /// Spherical means of radius `t > 0`, normalised to average 1 when `normalized`.
    Spherical { normalized: bool },
    /// Complex spherical means of real order `alpha`, `t > 0`.
    Complex { alpha: f64 },
}

impl MeanFamily {
    pub fn half_wave(dim: usize) -> Result<Self> {
        Ok(MeanFamily::HalfWave {
            phase: PhaseSpec::euclidean(dim)?,
            amplitude: AmplitudeSpec::one(),
        })
    }

    fn requires_positive_time(&self) -> bool {
        !matches!(self, MeanFamily::HalfWave { .. })
    }

    /// Radial profile constant and Bessel order for the mean families.
    fn radial(&self, dim: usize) -> Result<Option<(f64, f64)>> {
        Ok(match self {
            MeanFamily::HalfWave { .. } => None,
            MeanFamily::Spherical { normalized } => {
                let nu = 0.5 * (dim as f64 - 2.0);
                let mut c = (2.0 * std::f64::consts::PI).powf(0.5 * dim as f64);
                if *normalized {
                    c /= sphere_area(dim);
                }
                Some((nu, c))
            }
            MeanFamily::Complex { alpha } => {
                let beta = complex_mean_order(dim, *alpha)?;
                let c = 2f64.powf(beta) * std::f64::consts::PI.powf(0.5 * dim as f64);
                Some((beta, c))
            }
        })
    }
}

/// Applies a multiplier to a space-domain field. Nyquist bins are zeroed.
pub fn apply_multiplier(f: &Field, sigma: &MultiplierSpec) -> Result<Field> {
    f.expect_domain(Domain::Space)?;
    let table = sigma.tabulate(f.grid())?;
    let mut spec = f.forward()?;
    let grid = *f.grid();
    for (idx, (z, m)) in spec
        .samples_mut()
        .iter_mut()
        .zip(table.samples())
        .enumerate()
    {
        *z = if grid.is_nyquist(idx) { Complex64::default() } else { *z * m };
    }
    spec.inverse()
}

/// `e^{it phi(D)} a(tD) f` at one time.
pub fn half_wave(f: &Field, phase: &PhaseSpec, amplitude: &AmplitudeSpec, t: f64) -> Result<Field> {
    apply_multiplier(
        f,
        &MultiplierSpec::Propagator {
            phase: phase.clone(),
            amplitude: amplitude.clone(),
            time: t,
        },
    )
}

/// Spherical mean of radius `t > 0`.
pub fn spherical_mean(f: &Field, t: f64, normalized: bool) -> Result<Field> {
    let sigma = crate::symbols::spherical_multiplier(f.grid(), t, normalized)?;
    apply_multiplier(f, &sigma)
}

/// Complex spherical mean of order `alpha` and radius `t > 0`.
pub fn complex_mean(f: &Field, t: f64, alpha: f64) -> Result<Field> {
    let sigma = crate::symbols::complex_mean_multiplier(f.grid(), t, alpha)?;
    apply_multiplier(f, &sigma)
}

enum Kernel {
    Phase {
        amplitude: AmplitudeSpec,
        phis: Vec<f64>,
        freqs: Vec<[f64; 3]>,
    },
    Radial {
        order: f64,
        scale: f64,
        radii: Vec<f64>,
        profile: Option<RadialProfile>,
    },
}

/// Spectrum of one field prepared for repeated evaluation at many times.
pub(crate) struct Evolver {
    grid: GridSpec,
    active: Vec<usize>,
    coeffs: Vec<Complex64>,
    kernel: Kernel,
    engine: FftEngine,
    buffer: Vec<Complex64>,
    k_top: i32,
    positive_time: bool,
}

impl Evolver {
    pub(crate) fn new(f: &Field, family: &MeanFamily) -> Result<Self> {
        f.expect_domain(Domain::Space)?;
        let grid = *f.grid();
        let dim = grid.dim();
        let spec = f.forward()?;
        let peak = spec.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let floor = peak * SPECTRAL_FLOOR;
        let mut active = Vec::new();
        let mut coeffs = Vec::new();
        let mut rmax: f64 = 0.0;
        for (idx, z) in spec.samples().iter().enumerate() {
            if z.norm() > floor && !grid.is_nyquist(idx) {
                active.push(idx);
                coeffs.push(*z);
                rmax = rmax.max(crate::symbols::norm(&grid.frequency(idx)[..dim]));
            }
        }
        let kernel = match (family, family.radial(dim)?) {
            (MeanFamily::HalfWave { phase, amplitude }, _) => {
                if phase.dim() != dim {
                    return invalid("phase dimension differs from grid dimension");
                }
                let freqs: Vec<[f64; 3]> = active.iter().map(|&i| grid.frequency(i)).collect();
                let phis = freqs.iter().map(|xi| phase.eval(&xi[..dim])).collect();
                Kernel::Phase {
                    amplitude: amplitude.clone(),
                    phis,
                    freqs,
                }
            }
            (_, Some((order, scale))) => Kernel::Radial {
                order,
                scale,
                radii: active
                    .iter()
                    .map(|&i| crate::symbols::norm(&grid.frequency(i)[..dim]))
                    .collect(),
                profile: None,
            },
            _ => unreachable!(),
        };
        Ok(Self {
            grid,
            active,
            coeffs,
            kernel,
            engine: FftEngine::new(&grid),
            buffer: vec![Complex64::default(); grid.len()],
            k_top: if peak == 0.0 { 0 } else { shell_of_radius(rmax) },
            positive_time: family.requires_positive_time(),
        })
    }

    pub(crate) fn k_top(&self) -> i32 {
        self.k_top
    }

    fn check_times(&self, tg: &TimeGrid) -> Result<()> {
        if self.positive_time && tg.t_min() <= 0.0 {
            return invalid("spherical and complex means need strictly positive times");
        }
        tg.check_resolution(self.k_top)
    }

    fn ensure_profile(&mut self, t_max: f64) -> Result<()> {
        if let Kernel::Radial {
            order,
            scale,
            radii,
            profile,
        } = &mut self.kernel
        {
            let rmax = radii.iter().cloned().fold(0.0, f64::max);
            let need = t_max.abs() * rmax + 1.0;
            if profile.as_ref().is_none_or(|p| p.u_max() < need) {
                *profile = Some(RadialProfile::new(
                    *order,
                    *scale,
                    need,
                    RadialProfile::DEFAULT_STEP,
                )?);
            }
        }
        Ok(())
    }

    fn scatter(&mut self, values: impl Iterator<Item = Complex64>) -> &[Complex64] {
        self.buffer.fill(Complex64::default());
        for (&idx, v) in self.active.iter().zip(values) {
            self.buffer[idx] = v;
        }
        self.engine.inverse(&mut self.buffer);
        &self.buffer
    }

    /// Operator applied to the data at one time, with exact Bessel values for the means.
    pub(crate) fn at(&mut self, t: f64) -> Result<&[Complex64]> {
        let dim = self.grid.dim();
        if self.positive_time && t <= 0.0 {
            return invalid("spherical and complex means need strictly positive times");
        }
        let values: Vec<Complex64> = match &self.kernel {
            Kernel::Phase {
                amplitude,
                phis,
                freqs,
                ..
            } => self
                .coeffs
                .iter()
                .zip(phis.iter().zip(freqs))
                .map(|(c, (phi, xi))| {
                    let s = [t * xi[0], t * xi[1], t * xi[2]];
                    c * Complex64::from_polar(amplitude.eval(&s[..dim]), t * phi)
                })
                .collect(),
            Kernel::Radial {
                order, scale, radii, ..
            } => {
                let mut out = Vec::with_capacity(radii.len());
                for (c, r) in self.coeffs.iter().zip(radii) {
                    out.push(c * (*scale * crate::specfun::bessel_ratio(*order, t * r)?));
                }
                out
            }
        };
        Ok(self.scatter(values.into_iter()))
    }

    /// Visits the evolved field at every sample of `tg` in increasing time.
    pub(crate) fn sweep(
        &mut self,
        tg: &TimeGrid,
        mut visit: impl FnMut(usize, f64, &[Complex64]),
    ) -> Result<()> {
        self.check_times(tg)?;
        self.ensure_profile(tg.t_max().abs().max(tg.t_min().abs()))?;
        let dim = self.grid.dim();
        let n_active = self.active.len();
        match &self.kernel {
            Kernel::Phase {
                amplitude, phis, ..
            } if amplitude.is_constant() => {
                let a = amplitude.eval(&[0.0; 3][..dim]);
                let dt = tg.spacing();
                let rot: Vec<Complex64> = phis.iter().map(|p| Complex64::from_polar(1.0, dt * p)).collect();
                let phis = phis.clone();
                let mut cur: Vec<Complex64> = Vec::with_capacity(n_active);
                for i in 0..tg.len() {
                    let t = tg.sample(i);
                    if i % REANCHOR == 0 || i + 1 == tg.len() {
                        cur.clear();
                        cur.extend(
                            self.coeffs
                                .iter()
                                .zip(&phis)
                                .map(|(c, p)| c * a * Complex64::from_polar(1.0, t * p)),
                        );
                    } else {
                        cur.iter_mut().zip(&rot).for_each(|(z, r)| *z *= r);
                    }
                    let out = self.scatter(cur.iter().copied());
                    visit(i, t, out);
                }
            }
            Kernel::Phase { .. } => {
                for i in 0..tg.len() {
                    let t = tg.sample(i);
                    let out = self.at(t)?;
                    visit(i, t, out);
                }
            }
            Kernel::Radial { radii, profile, .. } => {
                let profile = profile.clone().expect("profile prepared");
                let radii = radii.clone();
                let coeffs = self.coeffs.clone();
                for i in 0..tg.len() {
                    let t = tg.sample(i);
                    let out = self.scatter(
                        coeffs
                            .iter()
                            .zip(&radii)
                            .map(|(c, r)| c * profile.eval(t * r)),
                    );
                    visit(i, t, out);
                }
            }
        }
        Ok(())
    }
}

/// Pointwise supremum over a time grid, with the first maximising time.
#[derive(Debug, Clone)]
pub struct MaximalField {
    grid: GridSpec,
    values: Vec<f64>,
    argmax: Vec<f64>,
    times: TimeGrid,
}

impl MaximalField {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest sampled time attaining the maximum at each point.
    pub fn argmax(&self) -> &[f64] {
        &self.argmax
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_of_moduli(self.values.iter().copied(), self.grid.cell_volume(), p)
    }
}

/// `sup_{t in tg} |T_t f|` for the chosen family.
pub fn maximal_function(f: &Field, family: &MeanFamily, tg: &TimeGrid) -> Result<MaximalField> {
    let mut ev = Evolver::new(f, family)?;
    let len = f.grid().len();
    let mut best = vec![-1.0f64; len];
    let mut argmax = vec![tg.t_min(); len];
    ev.sweep(tg, |_, t, out| {
        for ((b, a), z) in best.iter_mut().zip(argmax.iter_mut()).zip(out) {
            let m = z.norm_sqr();
            if m > *b {
                *b = m;
                *a = t;
            }
        }
    })?;
    Ok(MaximalField {
        grid: *f.grid(),
        values: best.into_iter().map(f64::sqrt).collect(),
        argmax,
        times: *tg,
    })
}

/// `delta -> || sup_{0 < t <= delta} |e^{it phi(D)} f - f| ||_p` for each `delta`.
///
/// Each interval is sampled at the resolution rule with at least eight times.
pub fn convergence_profile(
    f: &Field,
    phase: &PhaseSpec,
    deltas: &[f64],
    p: f64,
) -> Result<Vec<(f64, f64)>> {
    let family = MeanFamily::HalfWave {
        phase: phase.clone(),
        amplitude: AmplitudeSpec::one(),
    };
    let mut ev = Evolver::new(f, &family)?;
    let base: Vec<Complex64> = ev.at(0.0)?.to_vec();
    let mut out = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        if !(delta > 0.0) || !delta.is_finite() {
            return invalid(format!("convergence window {delta} must be positive"));
        }
        let steps = ((delta / max_time_step(ev.k_top())).ceil() as usize).max(8);
        let h = delta / steps as f64;
        let tg = TimeGrid::new(h, delta, steps)?;
        let mut best = vec![0.0f64; base.len()];
        ev.sweep(&tg, |_, _, cur| {
            for ((b, z), z0) in best.iter_mut().zip(cur).zip(&base) {
                let d = (z - z0).norm_sqr();
                if d > *b {
                    *b = d;
                }
            }
        })?;
        let norm = lp_norm_of_moduli(best.into_iter().map(f64::sqrt), f.grid().cell_volume(), p)?;
        out.push((delta, norm));
    }
    Ok(out)
}

/// Exact radial symbol of a mean family at `|xi| = r`; used by oracles and tests.
pub fn mean_symbol(family: &MeanFamily, dim: usize, r: f64) -> Result<f64> {
    match family {
        MeanFamily::Spherical { normalized } => {
            let v = sphere_transform(dim, r)?;
            Ok(if *normalized { v / sphere_area(dim) } else { v })
        }
        MeanFamily::Complex { alpha } => complex_mean_symbol(dim, *alpha, r),
        MeanFamily::HalfWave { .. } => invalid("half-wave symbols are not radial"),
    }
}
