//! Direction sets `Theta_k` and the angular partition of unity `chi_nu`.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use crate::error::{invalid, Result};
use crate::symbols::{norm, smooth_step};

/// A maximal `2^{-k/2}`-separated set of unit vectors with quadrature weights.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    dim: usize,
    k: u32,
    separation: f64,
    dirs: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl DirectionSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shell(&self) -> u32 {
        self.k
    }

    /// Chord separation `2^{-k/2}`.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn directions(&self) -> &[[f64; 3]] {
        &self.dirs
    }

    /// Surface weights summing to `|S^{n-1}|`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the nearest direction.
    pub fn nearest(&self, v: &[f64]) -> usize {
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, d) in self.dirs.iter().enumerate() {
            let dot: f64 = (0..self.dim).map(|a| d[a] * v[a]).sum();
            if dot > best_dot {
                best_dot = dot;
                best = i;
            }
        }
        best
    }
}

fn chord(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Fibonacci lattice of `m` nearly uniform points on the unit sphere.
pub fn fibonacci_sphere(m: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / m as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let a = golden * i as f64;
            [r * a.cos(), r * a.sin(), z]
        })
        .collect()
}

/// Uniform hash of unit vectors into cubes of side `cell`.
struct SphereHash {
    cell: f64,
    buckets: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl SphereHash {
    fn new(cell: f64) -> Self {
        Self {
            cell,
            buckets: HashMap::new(),
        }
    }

    fn key(&self, v: &[f64; 3]) -> (i64, i64, i64) {
        let f = |x: f64| (x / self.cell).floor() as i64;
        (f(v[0]), f(v[1]), f(v[2]))
    }

    fn insert(&mut self, v: &[f64; 3], id: usize) {
        let key = self.key(v);
        self.buckets.entry(key).or_default().push(id);
    }

    /// Ids whose cells touch the cube of half-width `reach` cells around `v`.
    fn near(&self, v: &[f64; 3], reach: i64, out: &mut Vec<usize>) {
        out.clear();
        let (a, b, c) = self.key(v);
        for i in -reach..=reach {
            for j in -reach..=reach {
                for l in -reach..=reach {
                    if let Some(ids) = self.buckets.get(&(a + i, b + j, c + l)) {
                        out.extend_from_slice(ids);
                    }
                }
            }
        }
    }
}

/// Builds `Theta_k` in dimension 2 or 3.
///
/// In the plane the set is `M` equally spaced angles with `M` as large as the
/// separation allows. On the sphere, Fibonacci points are thinned greedily to
/// the separation and then completed until no fine point is left uncovered;
/// weights come from assigning a fine Fibonacci set to nearest directions.
pub fn direction_set(dim: usize, k: u32) -> Result<DirectionSet> {
    let sep = (-(k as f64) / 2.0).exp2();
    match dim {
        2 => {
            let m = (TAU / (2.0 * (0.5 * sep).asin())).floor() as usize;
            let dirs: Vec<[f64; 3]> = (0..m)
                .map(|j| {
                    let a = TAU * j as f64 / m as f64;
                    [a.cos(), a.sin(), 0.0]
                })
                .collect();
            let weights = vec![TAU / m as f64; m];
            Ok(DirectionSet {
                dim,
                k,
                separation: sep,
                dirs,
                weights,
            })
        }
        3 => {
            let coarse = fibonacci_sphere(((16.0 * PI / (sep * sep)).ceil() as usize).max(64));
            let mut hash = SphereHash::new(sep);
            let mut dirs: Vec<[f64; 3]> = Vec::new();
            let mut scratch = Vec::new();
            let mut try_add = |v: &[f64; 3], dirs: &mut Vec<[f64; 3]>, hash: &mut SphereHash| {
                hash.near(v, 1, &mut scratch);
                if scratch.iter().all(|&i| chord(&dirs[i], v) >= sep) {
                    hash.insert(v, dirs.len());
                    dirs.push(*v);
                }
            };
            for v in &coarse {
                try_add(v, &mut dirs, &mut hash);
            }
            let fine = fibonacci_sphere(4 * coarse.len());
            for v in &fine {
                try_add(v, &mut dirs, &mut hash);
            }
            // nearest-direction cells of a fine sample give the weights
            let mut counts = vec![0usize; dirs.len()];
            let mut near = Vec::new();
            for v in &fine {
                let mut reach = 1;
                loop {
                    hash.near(v, reach, &mut near);
                    if !near.is_empty() {
                        break;
                    }
                    reach += 1;
                }
                let best = near
                    .iter()
                    .copied()
                    .min_by(|&a, &b| chord(&dirs[a], v).partial_cmp(&chord(&dirs[b], v)).unwrap())
                    .unwrap();
                counts[best] += 1;
            }
            let w = 4.0 * PI / fine.len() as f64;
            let weights = counts.iter().map(|&c| c as f64 * w).collect();
            Ok(DirectionSet {
                dim,
                k,
                separation: sep,
                dirs,
                weights,
            })
        }
        _ => invalid(format!("dimension {dim} not in {{2, 3}}")),
    }
}

/// Smooth angular partition of unity `{chi_nu}` subordinate to `Theta_k`.
///
/// Each `chi_nu` is degree-zero homogeneous, equals 1 near `nu` and vanishes
/// beyond twice the separation from `nu`. In the plane the raw bumps have a
/// plateau up to `0.35 a` and vanish from `0.65 a`, where `a` is the angle
/// subtended by the separation chord, so `chi_nu = 1` on the plateau. On the
/// sphere the raw bumps run from `0.25` to `1.5` separations.
#[derive(Debug)]
pub struct FramePartition {
    set: DirectionSet,
    inner: f64,
    outer: f64,
    hash: Option<SphereHash>,
}

impl std::fmt::Debug for SphereHash {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SphereHash({} buckets)", self.buckets.len())
    }
}

impl FramePartition {
    pub fn new(dim: usize, k: u32) -> Result<Self> {
        let set = direction_set(dim, k)?;
        let sep = set.separation();
        if dim == 2 {
            let a = 2.0 * (0.5 * sep).asin();
            Ok(Self {
                set,
                inner: 0.35 * a,
                outer: 0.65 * a,
                hash: None,
            })
        } else {
            let mut hash = SphereHash::new(sep);
            for (i, d) in set.directions().iter().enumerate() {
                hash.insert(d, i);
            }
            Ok(Self {
                set,
                inner: 0.25 * sep,
                outer: 1.5 * sep,
                hash: Some(hash),
            })
        }
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.set
    }

    /// Plateau radius of the raw bumps: angle in the plane, chord on the sphere.
    pub fn plateau(&self) -> f64 {
        self.inner
    }

    #[inline]
    fn raw(&self, d: f64) -> f64 {
        smooth_step((self.outer - d) / (self.outer - self.inner))
    }

    /// Nonzero values `(nu, chi_nu(xi))`, written into `out`. Empty at the origin.
    pub fn values(&self, xi: &[f64], out: &mut Vec<(usize, f64)>) {
        out.clear();
        let dim = self.set.dim();
        let r = norm(&xi[..dim]);
        if r == 0.0 {
            return;
        }
        if dim == 2 {
            let m = self.set.len() as i64;
            let step = TAU / m as f64;
            let theta = xi[1].atan2(xi[0]).rem_euclid(TAU);
            let j0 = (theta / step).round() as i64;
            for dj in -2..=2 {
                let j = (j0 + dj).rem_euclid(m);
                let mut d = (theta - j as f64 * step).rem_euclid(TAU);
                if d > PI {
                    d = TAU - d;
                }
                let v = self.raw(d);
                if v > 0.0 && !out.iter().any(|&(i, _)| i == j as usize) {
                    out.push((j as usize, v));
                }
            }
        } else {
            let u = [xi[0] / r, xi[1] / r, xi[2] / r];
            let hash = self.hash.as_ref().expect("sphere hash");
            let mut near = Vec::new();
            hash.near(&u, 2, &mut near);
            for i in near {
                let v = self.raw(chord(&self.set.directions()[i], &u));
                if v > 0.0 {
                    out.push((i, v));
                }
            }
            out.sort_unstable_by_key(|&(i, _)| i);
        }
        let total: f64 = out.iter().map(|&(_, v)| v).sum();
        for e in out.iter_mut() {
            e.1 /= total;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn planar_counts() {
        assert_eq!(direction_set(2, 4).unwrap().len(), 25);
        for k in 1..12 {
            let s = direction_set(2, k).unwrap();
            let sep = s.separation();
            let m = s.len() as f64;
            assert!(2.0 * (PI / m).sin() >= sep - 1e-12);
            // maximality: half a gap is closer than the separation
            assert!(2.0 * (PI / (2.0 * m)).sin() < sep);
            assert!((s.weights().iter().sum::<f64>() - TAU).abs() < 1e-12);
        }
    }

    #[test]
    fn spherical_set_is_separated_and_maximal() {
        let s = direction_set(3, 4).unwrap();
        let sep = s.separation();
        let dirs = s.directions();
        for i in 0..dirs.len() {
            for j in 0..i {
                assert!(chord(&dirs[i], &dirs[j]) >= sep - 1e-12);
            }
        }
        for v in fibonacci_sphere(20000) {
            let nearest = dirs.iter().map(|d| chord(d, &v)).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1.05 * sep, "gap {nearest} vs {sep}");
        }
        assert!((s.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn planar_partition_plateau_is_exact() {
        let p = FramePartition::new(2, 6).unwrap();
        let mut out = Vec::new();
        let step = TAU / p.directions().len() as f64;
        for j in 0..p.directions().len() {
            for frac in [-0.99, 0.0, 0.5, 0.99] {
                let a = j as f64 * step + frac * p.plateau();
                p.values(&[a.cos(), a.sin()], &mut out);
                assert_eq!(out, vec![(j, 1.0)]);
            }
        }
    }

    proptest! {
        #[test]
        fn planar_partition_sums_to_one(a in 0.0f64..TAU, r in 0.01f64..1e4, k in 0u32..12) {
            let p = FramePartition::new(2, k).unwrap();
            let mut out = Vec::new();
            p.values(&[r * a.cos(), r * a.sin()], &mut out);
            let total: f64 = out.iter().map(|e| e.1).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            let sep = p.directions().separation();
            for (i, _) in out {
                let d = p.directions().directions()[i];
                let c = ((d[0] - a.cos()).powi(2) + (d[1] - a.sin()).powi(2)).sqrt();
                prop_assert!(c <= 2.0 * sep);
            }
        }

        #[test]
        fn spherical_partition_sums_to_one(z in -1.0f64..1.0, a in 0.0f64..TAU) {
            let p = FramePartition::new(3, 5).unwrap();
            let r = (1.0 - z * z).sqrt();
            let v = [r * a.cos(), r * a.sin(), z];
            let mut out = Vec::new();
            p.values(&v, &mut out);
            let total: f64 = out.iter().map(|e| e.1).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            let sep = p.directions().separation();
            for (i, _) in out {
                prop_assert!(chord(&p.directions().directions()[i], &v) <= 2.0 * sep);
            }
        }
    }
}
