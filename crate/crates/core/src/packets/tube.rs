//! Tube sets `E = union_{y in E_0} gamma_y([-theta, theta])` swept by the flow
//! `gamma_y(t) = y - t grad phi(e_1)` of a translation-invariant phase, and
//! the lower bound `min_{x in E} max_t Re T_t f(x)`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::error::{invalid, Error, Result};
use crate::lattice::{read_header, write_header, Field, GridSpec, MASK_TAG};
use crate::propagate::{Evolver, MeanFamily, TimeGrid};
use crate::symbols::{AmplitudeSpec, PhaseSpec};

/// Subsamples per tube width when measuring cell coverage, and the floor per cell.
const SUBSAMPLES_2D: f64 = 32.0;
const SUBSAMPLES_3D: f64 = 8.0;
const MIN_SUBSAMPLES: usize = 4;

#[derive(Debug, Clone)]
pub struct TubeSet {
    grid: GridSpec,
    k: u32,
    theta: f64,
    center: [f64; 3],
    velocity: [f64; 3],
    points: Vec<usize>,
    measure: f64,
    exact_measure: f64,
}

impl TubeSet {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `grad phi(e_1)`.
    pub fn velocity(&self) -> &[f64] {
        &self.velocity[..self.grid.dim()]
    }

    /// Lattice points whose cell centers lie in `E`, in index order.
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.grid.len()];
        self.points.iter().for_each(|&i| m[i] = true);
        m
    }

    /// `|E|` from subsampled cell coverage.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Number of tube lattice points times the cell volume; the measure seen
    /// by discrete `L^p` norms.
    pub fn lattice_measure(&self) -> f64 {
        self.points.len() as f64 * self.grid.cell_volume()
    }

    /// `|E_0| 2 theta |v_1|`, the measure of the continuum set.
    pub fn exact_measure(&self) -> f64 {
        self.exact_measure
    }

    /// Membership of a point given relative to the disc center.
    fn contains_offset(&self, r: &[f64]) -> bool {
        contains(self.grid.dim(), &self.velocity, self.theta, self.radius(), r)
    }

    fn radius(&self) -> f64 {
        self.theta * (-0.5 * self.k as f64).exp2()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let dim = self.grid.dim();
        let mut r = [0.0; 3];
        for a in 0..dim {
            r[a] = x[a] - self.center[a];
        }
        self.contains_offset(&r[..dim])
    }

    /// The mask as a binary bitmap: the field header with the mask tag, then
    /// one byte (0 or 1) per lattice point. The carrier is not recorded.
    pub fn write_mask<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, &self.grid, MASK_TAG)?;
        let bytes: Vec<u8> = self.mask().into_iter().map(u8::from).collect();
        w.write_all(&bytes)?;
        Ok(())
    }
}

/// Reads a bitmap written by [`TubeSet::write_mask`].
pub fn read_mask<R: Read>(mut r: R) -> Result<(GridSpec, Vec<bool>)> {
    let (grid, tag) = read_header(&mut r)?;
    if tag != MASK_TAG {
        return Err(Error::Format(format!("expected a mask, found tag {tag}")));
    }
    let mut bytes = vec![0u8; grid.len()];
    r.read_exact(&mut bytes)?;
    let mut mask = Vec::with_capacity(bytes.len());
    for b in bytes {
        match b {
            0 => mask.push(false),
            1 => mask.push(true),
            _ => return Err(Error::Format(format!("mask byte {b} is not 0 or 1"))),
        }
    }
    Ok((grid, mask))
}

fn contains(dim: usize, v: &[f64; 3], theta: f64, radius: f64, r: &[f64]) -> bool {
    let t = -r[0] / v[0];
    if t.abs() > theta {
        return false;
    }
    let mut perp = 0.0;
    for a in 1..dim {
        let y = r[a] + t * v[a];
        perp += y * y;
    }
    perp.sqrt() <= radius
}

/// Tube of shell `k` through the disc `{y_1 = 0, |y'| <= theta 2^{-k/2}}` about
/// `center` (the box center when `None`), for `theta` in `(0, 1/2]`.
pub fn make_tube(
    grid: &GridSpec,
    k: u32,
    phase: &PhaseSpec,
    theta: f64,
    center: Option<&[f64]>,
) -> Result<TubeSet> {
    let dim = grid.dim();
    if !(theta > 0.0 && theta <= 0.5) {
        return invalid(format!("tube parameter theta = {theta} must lie in (0, 1/2]"));
    }
    if phase.dim() != dim {
        return invalid("phase dimension differs from grid dimension");
    }
    phase.validate()?;
    let mut e1 = [0.0; 3];
    e1[0] = 1.0;
    let velocity = phase.gradient(&e1[..dim]);
    if velocity[0].abs() < 1e-12 {
        return invalid("the flow is tangent to the base disc");
    }
    let center = match center {
        Some(c) if c.len() == dim => {
            let mut out = [0.0; 3];
            out[..dim].copy_from_slice(c);
            out
        }
        Some(_) => return invalid("tube center has the wrong dimension"),
        None => grid.center(),
    };
    let radius = theta * (-0.5 * k as f64).exp2();
    let h = grid.spacing();
    let n = grid.points() as i64;

    // index range per axis covering the tube plus one cell
    let mut lo = [0i64; 3];
    let mut hi = [0i64; 3];
    for a in 0..dim {
        let reach = theta * velocity[a].abs() + if a == 0 { 0.0 } else { radius };
        let from = ((center[a] - reach) / h).floor() as i64 - 1;
        let to = ((center[a] + reach) / h).ceil() as i64 + 1;
        if from < 0 || to >= n {
            return Err(Error::InvalidGrid(format!(
                "tube leaves the box along axis {a}"
            )));
        }
        lo[a] = from;
        hi[a] = to;
    }

    let per_width = if dim == 2 { SUBSAMPLES_2D } else { SUBSAMPLES_3D };
    let sub = ((per_width * h / (2.0 * radius)).ceil() as usize).max(MIN_SUBSAMPLES);
    let offsets: Vec<f64> = (0..sub)
        .map(|j| ((j as f64 + 0.5) / sub as f64 - 0.5) * h)
        .collect();
    let mut points = Vec::new();
    let mut covered = 0usize;
    let mut m = [0usize; 3];
    let span: Vec<i64> = (0..dim).map(|a| hi[a] - lo[a] + 1).collect();
    let cells: i64 = span.iter().product();
    for c in 0..cells {
        let mut rem = c;
        let mut r = [0.0; 3];
        for a in (0..dim).rev() {
            let i = lo[a] + rem % span[a];
            rem /= span[a];
            m[a] = i as usize;
            r[a] = i as f64 * h - center[a];
        }
        if contains(dim, &velocity, theta, radius, &r[..dim]) {
            points.push(grid.flat_index(&m[..dim]));
        }
        covered += count_inside(dim, &velocity, theta, radius, &r, &offsets);
    }
    points.sort_unstable();
    if points.is_empty() {
        return Err(Error::InvalidGrid(format!(
            "no lattice point lies in the tube of shell {k}; refine the grid"
        )));
    }
    let measure = covered as f64 / (sub as f64).powi(dim as i32) * grid.cell_volume();
    let disc = if dim == 2 { 2.0 * radius } else { PI * radius * radius };
    Ok(TubeSet {
        grid: *grid,
        k,
        theta,
        center,
        velocity,
        points,
        measure,
        exact_measure: disc * 2.0 * theta * velocity[0].abs(),
    })
}

fn count_inside(
    dim: usize,
    v: &[f64; 3],
    theta: f64,
    radius: f64,
    r: &[f64; 3],
    offsets: &[f64],
) -> usize {
    let s = offsets.len();
    let total = s.pow(dim as u32);
    let mut count = 0;
    for j in 0..total {
        let mut q = [0.0; 3];
        let mut rem = j;
        for a in 0..dim {
            q[a] = r[a] + offsets[rem % s];
            rem /= s;
        }
        if contains(dim, v, theta, radius, &q[..dim]) {
            count += 1;
        }
    }
    count
}

/// Result of [`tube_lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeBound {
    /// `min_{x in E} max_t Re T_t f(x)`.
    pub value: f64,
    /// Lattice index attaining the minimum.
    pub worst: usize,
}

/// `min` over the tube of the `max` over sampled times of `Re e^{it phi(D)} a(tD) f`.
pub fn tube_lower_bound(
    f: &Field,
    phase: &PhaseSpec,
    amplitude: &AmplitudeSpec,
    tube: &TubeSet,
    tg: &TimeGrid,
) -> Result<TubeBound> {
    let family = MeanFamily::HalfWave {
        phase: phase.clone(),
        amplitude: amplitude.clone(),
    };
    Ok(sweep_tube(f, &family, tube, tg)?.1)
}

/// One sweep giving both `sup_t |T_t f|` on the whole grid and the tube bound.
pub(crate) fn sweep_tube(
    f: &Field,
    family: &MeanFamily,
    tube: &TubeSet,
    tg: &TimeGrid,
) -> Result<(Vec<f64>, TubeBound)> {
    f.grid().ensure_same(&tube.grid)?;
    let mut evolver = Evolver::new(f, family)?;
    let grid = tube.grid;
    let modulation: Vec<_> = tube.points.iter().map(|&i| grid.modulation(i)).collect();
    let mut best = vec![f64::NEG_INFINITY; tube.points.len()];
    let mut sup = vec![0.0f64; grid.len()];
    evolver.sweep(tg, |_, _, out| {
        for (s, z) in sup.iter_mut().zip(out) {
            *s = s.max(z.norm_sqr());
        }
        for ((b, &i), m) in best.iter_mut().zip(&tube.points).zip(&modulation) {
            *b = b.max((out[i] * m).re);
        }
    })?;
    let (j, value) = best
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (j, v)| if v < acc.1 { (j, v) } else { acc });
    sup.iter_mut().for_each(|s| *s = s.sqrt());
    Ok((
        sup,
        TubeBound {
            value,
            worst: tube.points[j],
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(2, 256, 8.0).unwrap()
    }

    #[test]
    fn euclidean_tube_is_a_rectangle() {
        let phase = PhaseSpec::euclidean(2).unwrap();
        for k in [2, 4, 6] {
            let tube = make_tube(&grid(), k, &phase, 0.5, None).unwrap();
            let want = 2.0 * 0.5 * 2.0 * 0.5 * (-0.5 * k as f64).exp2();
            assert!((tube.exact_measure() - want).abs() < 1e-14);
            assert!((tube.measure() / want - 1.0).abs() < 0.05, "k={k}: {}", tube.measure());
            let c = grid().center();
            for &i in tube.points() {
                let x = grid().position(i);
                assert!((x[0] - c[0]).abs() <= 0.5 + 1e-12);
            }
        }
    }

    #[test]
    fn mask_is_symmetric_under_transverse_reflection() {
        let phase = PhaseSpec::euclidean(2).unwrap();
        let g = grid();
        let tube = make_tube(&g, 3, &phase, 0.4, None).unwrap();
        let mask = tube.mask();
        let n = g.points();
        for &i in tube.points() {
            let m = g.multi_index(i);
            let mirrored = g.flat_index(&[m[0], (n - m[1]) % n]);
            assert!(mask[mirrored]);
        }
    }

    #[test]
    fn anisotropic_tube_follows_the_gradient() {
        let phase = PhaseSpec::anisotropic(vec![vec![1.0, 0.3], vec![0.3, 1.2]]).unwrap();
        let g = grid();
        let tube = make_tube(&g, 4, &phase, 0.5, None).unwrap();
        let v = phase.gradient(&[1.0, 0.0]);
        let c = g.center();
        assert!(tube.contains(&[c[0] - 0.4 * v[0], c[1] - 0.4 * v[1]]));
        assert!(!tube.contains(&[c[0] - 0.4 * v[0], c[1] + 0.4 * v[1]]));
        assert!((tube.measure() / tube.exact_measure() - 1.0).abs() < 0.05);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let phase = PhaseSpec::euclidean(2).unwrap();
        assert!(make_tube(&grid(), 3, &phase, 0.0, None).is_err());
        assert!(make_tube(&grid(), 3, &phase, 0.6, None).is_err());
        assert!(make_tube(&grid(), 3, &PhaseSpec::zero(2).unwrap(), 0.5, None).is_err());
        let corner = [0.1, 0.1];
        assert!(make_tube(&grid(), 3, &phase, 0.5, Some(&corner)).is_err());
    }

    #[test]
    fn mask_roundtrips_through_the_bitmap() {
        let tube = make_tube(&grid(), 3, &PhaseSpec::euclidean(2).unwrap(), 0.5, None).unwrap();
        let mut buf = Vec::new();
        tube.write_mask(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + grid().len());
        let (g, mask) = read_mask(buf.as_slice()).unwrap();
        assert_eq!(g, grid());
        assert_eq!(mask, tube.mask());
        let f = Field::zeros(grid(), crate::lattice::Domain::Space);
        let mut field_bytes = Vec::new();
        f.write_binary(&mut field_bytes).unwrap();
        assert!(read_mask(field_bytes.as_slice()).is_err());
    }
}
