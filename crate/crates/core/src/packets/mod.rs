//! Wave packets `f_nu(x) = e^{i 2^k nu.x} psi(2^k (nu.x) nu + 2^{k/2} P_nu x)`,
//! Knapp sums over direction sets, random shell fields, tube sets and the
//! flow residual of a translation-invariant propagator.
//!
//! Packets are synthesised from their exact transform
//! `f_nu^(xi) = 2^{-k(n+1)/2} psi^(B^{-1}(xi - 2^k nu)) e^{-i xi.x_c}` with
//! `B = 2^k nu nu^T + 2^{k/2} P_nu`, so the spectral support is exact and the
//! only sampling error is periodisation, measured by [`boundary_ratio`].

mod envelope;
mod flow;
mod tube;

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::hpfio::direction_set;
use crate::lattice::{Domain, Field, GridSpec, MIN_BOX_LENGTH, MIN_POINTS};
use crate::symbols::{dot, lp_piece, norm, Cone};

pub use envelope::Envelope;
pub use flow::{flow_residual, FlowResidual};
pub use tube::{make_tube, read_mask, tube_lower_bound, TubeBound, TubeSet};
pub(crate) use tube::sweep_tube;

/// One packet: shell `k`, unit direction, envelope and spatial center
/// (the box center when `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacketSpec {
    dim: usize,
    pub k: u32,
    direction: [f64; 3],
    pub envelope: Envelope,
    pub center: Option<[f64; 3]>,
}

impl WavePacketSpec {
    pub fn new(dim: usize, k: u32, direction: &[f64]) -> Result<Self> {
        Ok(Self {
            dim,
            k,
            direction: unit_direction(dim, direction)?,
            envelope: Envelope::default(),
            center: None,
        })
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Result<Self> {
        envelope.validate()?;
        self.envelope = envelope;
        Ok(self)
    }

    pub fn with_center(mut self, center: &[f64]) -> Result<Self> {
        self.center = Some(padded(self.dim, center)?);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction[..self.dim]
    }
}

fn padded(dim: usize, v: &[f64]) -> Result<[f64; 3]> {
    if v.len() != dim || !(2..=3).contains(&dim) {
        return invalid(format!("expected a vector of length {dim}, got {}", v.len()));
    }
    let mut out = [0.0; 3];
    out[..dim].copy_from_slice(v);
    Ok(out)
}

fn unit_direction(dim: usize, v: &[f64]) -> Result<[f64; 3]> {
    let out = padded(dim, v)?;
    if (norm(v) - 1.0).abs() > 1e-9 {
        return invalid(format!("direction {v:?} is not a unit vector"));
    }
    Ok(out)
}

/// Largest offset from `carrier` along each axis of the spectral support of a packet.
fn support_band(dim: usize, k: u32, nu: &[f64], c: f64, carrier: &[f64]) -> [f64; 3] {
    let big = (k as f64).exp2();
    let small = (0.5 * k as f64).exp2();
    let mut out = [0.0; 3];
    for a in 0..dim {
        let stretch = (big * big * nu[a] * nu[a] + small * small * (1.0 - nu[a] * nu[a])).sqrt();
        out[a] = (big * nu[a] - carrier[a]).abs() + c * stretch;
    }
    out
}

fn check_band(grid: &GridSpec, band: &[f64; 3]) -> Result<()> {
    let nyq = grid.nyquist();
    if let Some(a) = (0..grid.dim()).find(|&a| band[a] >= nyq) {
        return Err(Error::Support(format!(
            "packet spectrum reaches {:.4} from the carrier along axis {a}, Nyquist is {nyq:.4}",
            band[a]
        )));
    }
    Ok(())
}

fn resolve_center(grid: &GridSpec, center: Option<[f64; 3]>) -> [f64; 3] {
    center.unwrap_or_else(|| grid.center())
}

/// Spectral value of a packet at absolute frequency `xi`.
fn packet_spectrum(spec: &WavePacketSpec, center: &[f64; 3], xi: &[f64]) -> Complex64 {
    let dim = spec.dim;
    let k = spec.k as f64;
    let big = k.exp2();
    let nu = spec.direction();
    let mut w = [0.0; 3];
    for a in 0..dim {
        w[a] = xi[a] - big * nu[a];
    }
    let along = dot(&w[..dim], nu);
    let perp = (dot(&w[..dim], &w[..dim]) - along * along).max(0.0);
    let eta = (along * along / (big * big) + perp / big).sqrt();
    let amp = spec.envelope.spectrum(eta);
    if amp == 0.0 {
        return Complex64::default();
    }
    let scale = (-0.5 * k * (dim as f64 + 1.0)).exp2();
    Complex64::from_polar(scale * amp, -dot(xi, &center[..dim]))
}

/// Spectrum of a packet on the frequency lattice of `grid`.
pub fn packet_spectrum_field(grid: &GridSpec, spec: &WavePacketSpec) -> Result<Field> {
    if grid.dim() != spec.dim {
        return invalid("packet dimension differs from grid dimension");
    }
    spec.envelope.validate()?;
    let band = support_band(
        spec.dim,
        spec.k,
        spec.direction(),
        spec.envelope.radius,
        grid.carrier(),
    );
    check_band(grid, &band)?;
    let center = resolve_center(grid, spec.center);
    Ok(Field::from_frequency_fn(*grid, |xi| packet_spectrum(spec, &center, xi)))
}

/// The packet `f_nu` sampled on `grid`.
pub fn make_packet(grid: &GridSpec, spec: &WavePacketSpec) -> Result<Field> {
    packet_spectrum_field(grid, spec)?.inverse()
}

/// Largest modulus on the faces `x_a = 0` over the largest modulus anywhere.
pub fn boundary_ratio(f: &Field) -> Result<f64> {
    f.expect_domain(Domain::Space)?;
    let grid = f.grid();
    let mut face: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for (idx, z) in f.samples().iter().enumerate() {
        let m = z.norm();
        peak = peak.max(m);
        if grid.is_boundary(idx) {
            face = face.max(m);
        }
    }
    Ok(if peak == 0.0 { 0.0 } else { face / peak })
}

/// Errors with [`Error::Periodization`] when the boundary ratio exceeds `tol`.
pub fn check_periodization(f: &Field, tol: f64) -> Result<f64> {
    let r = boundary_ratio(f)?;
    if r > tol {
        return Err(Error::Periodization(format!(
            "boundary modulus is {r:.3e} of the peak, above {tol:.1e}"
        )));
    }
    Ok(r)
}

/// `int |f^| d xi` approximated by the lattice sum.
pub fn spectrum_l1(f: &Field) -> Result<f64> {
    let spec = match f.domain() {
        Domain::Space => f.forward()?,
        Domain::Frequency => f.clone(),
    };
    Ok(spec.samples().iter().map(|z| z.norm()).sum::<f64>() * spec.grid().frequency_cell())
}

/// Sizing rules for heterodyne packet grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPolicy {
    /// Packets must decay to this fraction of their peak inside the box.
    pub tail_tolerance: f64,
    /// Required ratio of Nyquist frequency to the spectral half-width.
    pub margin: f64,
    /// Upper bound on the total number of lattice points.
    pub max_points: usize,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            tail_tolerance: 1e-8,
            margin: 1.05,
            max_points: 1 << 22,
        }
    }
}

/// Smallest power-of-two lattice, carried at `2^k axis`, holding packets of shell `k`
/// in the given directions at the box center while they travel up to `travel`.
pub fn packet_grid(
    dim: usize,
    k: u32,
    directions: &[[f64; 3]],
    axis: &[f64],
    envelope: &Envelope,
    travel: f64,
    policy: &GridPolicy,
) -> Result<GridSpec> {
    let axis = unit_direction(dim, axis)?;
    if directions.is_empty() {
        return invalid("no packet directions");
    }
    if !(travel >= 0.0 && travel.is_finite()) {
        return invalid(format!("travel distance {travel} must be nonnegative"));
    }
    let big = (k as f64).exp2();
    let mut carrier = [0.0; 3];
    for a in 0..dim {
        carrier[a] = big * axis[a];
    }
    let mut half_width: f64 = 0.0;
    for nu in directions {
        let band = support_band(dim, k, &nu[..dim], envelope.radius, &carrier);
        half_width = band[..dim].iter().fold(half_width, |m, &b| m.max(b));
    }
    // images across a face add up, hence the quarter
    let radius = envelope.extent(dim, 0.25 * policy.tail_tolerance)? * (-0.5 * k as f64).exp2() + travel;
    let box_length = (2.0 * radius).max(MIN_BOX_LENGTH);
    let mut points = MIN_POINTS;
    while PI * points as f64 / box_length <= policy.margin * half_width {
        points *= 2;
    }
    if points.pow(dim as u32) > policy.max_points {
        return Err(Error::InvalidGrid(format!(
            "shell {k} needs {points} points per axis on a box of length {box_length:.3}"
        )));
    }
    GridSpec::new(dim, points, box_length)?.with_carrier(&carrier[..dim])
}

/// Packets of shell `k` summed over the directions of `Theta_k` inside a cone.
#[derive(Debug, Clone, PartialEq)]
pub struct KnappSpec {
    pub k: u32,
    pub cone: Cone,
    pub envelope: Envelope,
    pub center: Option<[f64; 3]>,
}

impl KnappSpec {
    pub fn new(k: u32, cone: Cone) -> Self {
        Self {
            k,
            cone,
            envelope: Envelope::default(),
            center: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }
}

/// A constituent of a Knapp sum: its index in `Theta_k` and its direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnappMember {
    pub index: usize,
    pub direction: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct KnappSum {
    pub field: Field,
    pub members: Vec<KnappMember>,
    /// `|Theta_k|` times the fraction of the sphere inside the cone.
    pub expected_count: f64,
    /// `||f_nu||_2` of each member, from the lattice spectrum.
    pub member_norms: Vec<f64>,
    k: u32,
    center: [f64; 3],
}

/// Fraction of the unit sphere inside a cone of full aperture `aperture`.
pub fn cone_fraction(dim: usize, aperture: f64) -> f64 {
    if dim == 2 {
        aperture / (2.0 * PI)
    } else {
        0.5 * (1.0 - (0.5 * aperture).cos())
    }
}

/// Members of `Theta_k` inside the cone, in direction-index order, and the expected count.
pub fn knapp_members(spec: &KnappSpec) -> Result<(Vec<KnappMember>, f64)> {
    let dim = spec.dim();
    let set = direction_set(dim, spec.k)?;
    let members: Vec<KnappMember> = set
        .directions()
        .iter()
        .enumerate()
        .filter(|(_, d)| spec.cone.contains(&d[..dim]))
        .map(|(index, d)| KnappMember {
            index,
            direction: *d,
        })
        .collect();
    if members.is_empty() {
        return invalid(format!("no direction of shell {} lies in the cone", spec.k));
    }
    let expected = set.len() as f64 * cone_fraction(dim, spec.cone.aperture());
    Ok((members, expected))
}

/// `sum_nu f_nu` over `Theta_k` inside the cone, summed in direction-index order.
pub fn make_knapp_sum(grid: &GridSpec, spec: &KnappSpec) -> Result<KnappSum> {
    let dim = spec.dim();
    let (members, expected_count) = knapp_members(spec)?;
    let mut total = Field::zeros(*grid, Domain::Frequency);
    let mut member_norms = Vec::with_capacity(members.len());
    let unit = grid.frequency_cell() / (2.0 * PI).powi(dim as i32);
    for m in &members {
        let packet = WavePacketSpec {
            dim,
            k: spec.k,
            direction: m.direction,
            envelope: spec.envelope,
            center: spec.center,
        };
        let s = packet_spectrum_field(grid, &packet)?;
        member_norms.push((s.samples().iter().map(|z| z.norm_sqr()).sum::<f64>() * unit).sqrt());
        total
            .samples_mut()
            .iter_mut()
            .zip(s.samples())
            .for_each(|(a, b)| *a += b);
    }
    Ok(KnappSum {
        field: total.inverse()?,
        members,
        expected_count,
        member_norms,
        k: spec.k,
        center: resolve_center(grid, spec.center),
    })
}

impl KnappSum {
    /// CSV manifest with one row per constituent packet.
    pub fn write_manifest<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,index,nu_x,nu_y,nu_z,center_x,center_y,center_z,l2_norm")?;
        for (m, l2) in self.members.iter().zip(&self.member_norms) {
            let d = m.direction;
            let c = self.center;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                self.k, m.index, d[0], d[1], d[2], c[0], c[1], c[2], l2
            )?;
        }
        Ok(())
    }
}

/// Complex Gaussian noise filtered by `psi_k(|xi|)`, normalised to unit `L^2` norm.
/// Deterministic in `seed`.
pub fn random_shell_field(grid: &GridSpec, k: u32, seed: u64) -> Result<Field> {
    if grid.has_carrier() {
        return invalid("random shell fields need a grid without carrier");
    }
    let top = (k as f64 + 1.0).exp2();
    if top >= grid.nyquist() {
        return Err(Error::Support(format!(
            "shell {k} reaches {top}, Nyquist is {:.4}",
            grid.nyquist()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = grid.dim();
    let mut samples = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let w = lp_piece(k, norm(&grid.frequency(idx)[..dim]));
        samples.push(Complex64::new(re, im) * w);
    }
    let energy: f64 = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.frequency_cell()
        / (2.0 * PI).powi(dim as i32);
    let scale = 1.0 / energy.sqrt();
    samples.iter_mut().for_each(|z| *z *= scale);
    Field::new(*grid, Domain::Frequency, samples)?.inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_for(k: u32) -> GridSpec {
        packet_grid(
            2,
            k,
            &[[1.0, 0.0, 0.0]],
            &[1.0, 0.0],
            &Envelope::default(),
            0.0,
            &GridPolicy::default(),
        )
        .unwrap()
    }

    #[test]
    fn packet_matches_its_defining_formula() {
        let k = 5;
        let nu = [0.8, 0.6];
        let spec = WavePacketSpec::new(2, k, &nu).unwrap();
        let wide = packet_grid(2, k, &[[0.8, 0.6, 0.0]], &[1.0, 0.0], &spec.envelope, 0.0, &GridPolicy::default()).unwrap();
        let f = make_packet(&wide, &spec).unwrap();
        let c = wide.center();
        let env = spec.envelope;
        let big = (k as f64).exp2();
        let peak = env.origin_value(2);
        for idx in (0..wide.len()).step_by(wide.len() / 97) {
            let x = wide.position(idx);
            let r = [x[0] - c[0], x[1] - c[1]];
            let along = dot(&r, &nu);
            let perp = [r[0] - along * nu[0], r[1] - along * nu[1]];
            let y = [big * along * nu[0] + big.sqrt() * perp[0], big * along * nu[1] + big.sqrt() * perp[1]];
            let want = Complex64::from_polar(env.profile(2, norm(&y)).unwrap(), big * along);
            let got = f.value(idx);
            assert!((got - want).norm() < 1e-9 * peak, "{got} vs {want}");
        }
    }

    #[test]
    fn modulus_at_center_is_psi_zero() {
        for k in [3, 6] {
            let grid = grid_for(k);
            let f = make_packet(&grid, &WavePacketSpec::new(2, k, &[1.0, 0.0]).unwrap()).unwrap();
            let n = grid.points();
            let idx = grid.flat_index(&[n / 2, n / 2]);
            let psi0 = Envelope::default().origin_value(2);
            assert!((f.value(idx).norm() - psi0).abs() < 1e-10 * psi0);
            assert!(check_periodization(&f, 1e-8).is_ok());
        }
    }

    #[test]
    fn spectrum_stays_in_the_declared_support() {
        let k = 4;
        let spec = WavePacketSpec::new(2, k, &[0.6, -0.8]).unwrap();
        let grid = packet_grid(2, k, &[[0.6, -0.8, 0.0]], &[0.6, -0.8], &spec.envelope, 0.0, &GridPolicy::default()).unwrap();
        let f = make_packet(&grid, &spec).unwrap().forward().unwrap();
        let big = (k as f64).exp2();
        let mut total = 0.0;
        let mut outside = 0.0;
        for (idx, z) in f.samples().iter().enumerate() {
            let xi = grid.frequency(idx);
            let r = norm(&xi[..2]);
            let dir = [xi[0] / r - 0.6, xi[1] / r + 0.8];
            let e = z.norm_sqr();
            total += e;
            if r < 0.5 * big || r > 2.0 * big || norm(&dir) > 0.5 / big.sqrt() {
                outside += e;
            }
        }
        assert!(outside <= 1e-10 * total);
    }

    #[test]
    fn spectral_mass_is_independent_of_the_shell() {
        let want = Envelope::default().spectrum_l1(2);
        for k in [3, 5, 7] {
            let grid = grid_for(k);
            let f = make_packet(&grid, &WavePacketSpec::new(2, k, &[1.0, 0.0]).unwrap()).unwrap();
            let got = spectrum_l1(&f).unwrap();
            assert!((got / want - 1.0).abs() < 1e-6, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn norms_survive_lattice_refinement() {
        let k = 4;
        let coarse = grid_for(k);
        let fine = GridSpec::new(2, 2 * coarse.points(), coarse.box_length())
            .unwrap()
            .with_carrier(coarse.carrier())
            .unwrap();
        let spec = WavePacketSpec::new(2, k, &[1.0, 0.0]).unwrap();
        let a = make_packet(&coarse, &spec).unwrap();
        let b = make_packet(&fine, &spec).unwrap();
        for p in [1.25, 2.0, 4.0, 6.0, f64::INFINITY] {
            let (na, nb) = (a.lp_norm(p).unwrap(), b.lp_norm(p).unwrap());
            assert!((na / nb - 1.0).abs() < 1e-3, "p={p}: {na} vs {nb}");
        }
    }

    #[test]
    fn oversized_shells_are_rejected() {
        let grid = GridSpec::new(2, 32, 8.0).unwrap();
        let spec = WavePacketSpec::new(2, 4, &[1.0, 0.0]).unwrap();
        assert!(matches!(make_packet(&grid, &spec), Err(Error::Support(_))));
        assert!(WavePacketSpec::new(2, 4, &[1.0, 1.0]).is_err());
        assert!(random_shell_field(&grid, 3, 1).is_err());
    }

    #[test]
    fn single_direction_cone_reproduces_the_packet() {
        let k = 4;
        let cone = Cone::new(&[1.0, 0.0], 0.05).unwrap();
        let spec = KnappSpec::new(k, cone);
        let grid = grid_for(k);
        let sum = make_knapp_sum(&grid, &spec).unwrap();
        assert_eq!(sum.members.len(), 1);
        let packet = make_packet(&grid, &WavePacketSpec::new(2, k, &[1.0, 0.0]).unwrap()).unwrap();
        for (a, b) in sum.field.samples().iter().zip(packet.samples()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn knapp_members_are_almost_orthogonal() {
        let k = 6;
        let cone = Cone::new(&[1.0, 0.0], PI / 6.0).unwrap();
        let spec = KnappSpec::new(k, cone);
        let (members, expected) = knapp_members(&spec).unwrap();
        let dirs: Vec<[f64; 3]> = members.iter().map(|m| m.direction).collect();
        let grid = packet_grid(2, k, &dirs, &[1.0, 0.0], &spec.envelope, 0.0, &GridPolicy::default()).unwrap();
        let sum = make_knapp_sum(&grid, &spec).unwrap();
        let n = sum.members.len() as f64;
        assert!(n <= 4.0 * expected && n >= expected / 4.0);
        let parts: f64 = sum.member_norms.iter().map(|x| x * x).sum();
        let whole = sum.field.lp_norm(2.0).unwrap().powi(2);
        assert!((whole / parts - 1.0).abs() < 0.2, "{whole} vs {parts}");
        let mut csv = Vec::new();
        sum.write_manifest(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), members.len() + 1);
    }

    #[test]
    fn random_fields_are_reproducible_and_normalised() {
        let grid = GridSpec::new(2, 64, 8.0).unwrap();
        let a = random_shell_field(&grid, 3, 7).unwrap();
        let b = random_shell_field(&grid, 3, 7).unwrap();
        let c = random_shell_field(&grid, 3, 8).unwrap();
        assert_eq!(a.samples(), b.samples());
        assert_ne!(a.samples(), c.samples());
        assert!((a.lp_norm(2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(crate::hpfio::hpfio_norm_packet(&a, 0.0, 2.0, 3).is_ok());
    }
}
