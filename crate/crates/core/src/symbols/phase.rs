//! Degree-one homogeneous phases and order-`m` amplitudes.

use super::cutoffs::{conic_value, Cone};
use super::norm;
use crate::error::{invalid, Error, Result};

/// Concrete phase functions.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseKind {
    /// `phi(xi) = |xi|`
    Euclidean,
    /// `phi(xi) = sqrt(xi^T A xi)` for symmetric positive definite `A`
    Anisotropic { matrix: Vec<Vec<f64>> },
    /// `phi = 0`; the propagator reduces to the amplitude multiplier
    Zero,
}

/// A phase `phi(xi)`, smooth and positively homogeneous of degree one away from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpec {
    dim: usize,
    kind: PhaseKind,
    cone: Option<Cone>,
    mat: [[f64; 3]; 3],
}

impl PhaseSpec {
    pub fn euclidean(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            kind: PhaseKind::Euclidean,
            cone: None,
            mat: identity(),
        })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            kind: PhaseKind::Zero,
            cone: None,
            mat: identity(),
        })
    }

    /// `sqrt(xi^T A xi)`; `A` must be symmetric positive definite.
    pub fn anisotropic(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let dim = matrix.len();
        check_dim(dim)?;
        if matrix.iter().any(|row| row.len() != dim) {
            return invalid("phase matrix must be square");
        }
        let mut mat = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                let a = matrix[i][j];
                if !a.is_finite() || (a - matrix[j][i]).abs() > 1e-12 * a.abs().max(1.0) {
                    return invalid("phase matrix must be finite and symmetric");
                }
                mat[i][j] = a;
            }
        }
        // leading principal minors
        let m1 = mat[0][0];
        let m2 = mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0];
        let m3 = det3(&mat);
        if m1 <= 0.0 || m2 <= 0.0 || (dim == 3 && m3 <= 0.0) {
            return invalid("phase matrix must be positive definite");
        }
        Ok(Self {
            dim,
            kind: PhaseKind::Anisotropic { matrix },
            cone: None,
            mat,
        })
    }

    /// `sqrt(sum_i d_i xi_i^2)`.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let matrix = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { diag[i] } else { 0.0 }).collect())
            .collect();
        Self::anisotropic(matrix)
    }

    /// Restricts the homogeneity and rank checks to a cone.
    pub fn with_cone(mut self, cone: Cone) -> Result<Self> {
        if cone.dim() != self.dim {
            return invalid("cone dimension differs from phase dimension");
        }
        self.cone = Some(cone);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &PhaseKind {
        &self.kind
    }

    pub fn cone(&self) -> Option<&Cone> {
        self.cone.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PhaseKind::Zero)
    }

    #[inline]
    fn quad(&self, xi: &[f64]) -> f64 {
        let mut q = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                q += xi[i] * self.mat[i][j] * xi[j];
            }
        }
        q
    }

    #[inline]
    pub fn eval(&self, xi: &[f64]) -> f64 {
        match self.kind {
            PhaseKind::Euclidean => norm(&xi[..self.dim]),
            PhaseKind::Anisotropic { .. } => self.quad(xi).max(0.0).sqrt(),
            PhaseKind::Zero => 0.0,
        }
    }

    /// `grad phi(xi)`, zero at the origin.
    pub fn gradient(&self, xi: &[f64]) -> [f64; 3] {
        let mut g = [0.0; 3];
        let phi = self.eval(xi);
        if phi == 0.0 {
            return g;
        }
        for i in 0..self.dim {
            g[i] = (0..self.dim).map(|j| self.mat[i][j] * xi[j]).sum::<f64>() / phi;
        }
        g
    }

    /// `Hess phi(xi) = A / phi - (A xi)(A xi)^T / phi^3` for nonzero `xi`.
    pub fn hessian(&self, xi: &[f64]) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        let phi = self.eval(xi);
        if phi == 0.0 {
            return h;
        }
        let mut ax = [0.0; 3];
        for i in 0..self.dim {
            ax[i] = (0..self.dim).map(|j| self.mat[i][j] * xi[j]).sum();
        }
        for i in 0..self.dim {
            for j in 0..self.dim {
                h[i][j] = self.mat[i][j] / phi - ax[i] * ax[j] / phi.powi(3);
            }
        }
        h
    }

    /// Rank of the Hessian restricted to the orthogonal complement of `xi`.
    pub fn transversal_rank(&self, xi: &[f64]) -> usize {
        let h = self.hessian(xi);
        let basis = orthonormal_complement(&xi[..self.dim]);
        let k = self.dim - 1;
        let mut m = [[0.0; 2]; 2];
        for a in 0..k {
            for b in 0..k {
                let mut s = 0.0;
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        s += basis[a][i] * h[i][j] * basis[b][j];
                    }
                }
                m[a][b] = s;
            }
        }
        let scale = 1.0 / norm(&xi[..self.dim]).max(1e-300);
        let tol = 1e-9 * scale;
        if k == 1 {
            usize::from(m[0][0].abs() > tol)
        } else {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det.abs() > tol * tol {
                2
            } else if m.iter().flatten().any(|v| v.abs() > tol) {
                1
            } else {
                0
            }
        }
    }

    /// Checks degree-one homogeneity and Hessian rank `n - 1` on sample directions
    /// (inside the cone when one is set). Returns the worst homogeneity defect.
    pub fn validate(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for dir in sample_directions(self.dim) {
            if let Some(c) = &self.cone {
                if !c.contains(&dir[..self.dim]) {
                    continue;
                }
            }
            let base = self.eval(&dir);
            for &lam in &[0.5, 2.0, 17.0, 1024.0] {
                let scaled: Vec<f64> = dir[..self.dim].iter().map(|x| x * lam).collect();
                let d = (self.eval(&scaled) - lam * base).abs() / (lam * base.max(1e-300));
                worst = worst.max(d);
            }
            if self.transversal_rank(&dir) != self.dim - 1 {
                return Err(Error::InvalidArgument(format!(
                    "phase Hessian has rank below {} at {:?}",
                    self.dim - 1,
                    &dir[..self.dim]
                )));
            }
        }
        if worst > 1e-12 {
            return invalid(format!("phase is not homogeneous of degree one ({worst:e})"));
        }
        Ok(worst)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim != 2 && dim != 3 {
        return invalid(format!("dimension {dim} not in {{2, 3}}"));
    }
    Ok(())
}

fn identity() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn orthonormal_complement(v: &[f64]) -> Vec<[f64; 3]> {
    let n = norm(v);
    let mut u = [0.0; 3];
    for (i, x) in v.iter().enumerate() {
        u[i] = x / n;
    }
    if v.len() == 2 {
        return vec![[-u[1], u[0], 0.0]];
    }
    // pick the coordinate axis least aligned with u
    let k = (0..3)
        .min_by(|&a, &b| u[a].abs().partial_cmp(&u[b].abs()).unwrap())
        .unwrap();
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let d: f64 = (0..3).map(|i| e[i] * u[i]).sum();
    let mut a = [e[0] - d * u[0], e[1] - d * u[1], e[2] - d * u[2]];
    let na = norm(&a);
    a.iter_mut().for_each(|x| *x /= na);
    let b = [
        u[1] * a[2] - u[2] * a[1],
        u[2] * a[0] - u[0] * a[2],
        u[0] * a[1] - u[1] * a[0],
    ];
    vec![a, b]
}

fn sample_directions(dim: usize) -> Vec<[f64; 3]> {
    if dim == 2 {
        (0..24)
            .map(|i| {
                let a = (i as f64 + 0.5) * std::f64::consts::TAU / 24.0;
                [a.cos(), a.sin(), 0.0]
            })
            .collect()
    } else {
        let m = 48;
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        (0..m)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / m as f64;
                let r = (1.0 - z * z).sqrt();
                let a = golden * i as f64;
                [r * a.cos(), r * a.sin(), z]
            })
            .collect()
    }
}

/// Functional form of an amplitude.
#[derive(Debug, Clone, PartialEq)]
pub enum AmplitudeForm {
    /// A constant, order 0.
    Constant(f64),
    /// Conic cutoff about an axis with parameter `theta0`, order 0.
    ConicCutoff { axis: Vec<f64>, theta0: f64 },
    /// `c <xi>^m`.
    Polyhomogeneous { coefficient: f64 },
}

/// An amplitude `a(xi)` of order `m` in the Kohn-Nirenberg sense.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSpec {
    order: f64,
    form: AmplitudeForm,
}

impl AmplitudeSpec {
    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self {
            order: 0.0,
            form: AmplitudeForm::Constant(c),
        }
    }

    /// Equal to 1 within `theta0 / 2` of `axis`, 0 beyond `theta0`; zero at the origin.
    pub fn conic_cutoff(axis: &[f64], theta0: f64) -> Result<Self> {
        let cone = Cone::new(axis, theta0)?;
        Ok(Self {
            order: 0.0,
            form: AmplitudeForm::ConicCutoff {
                axis: cone.axis().to_vec(),
                theta0,
            },
        })
    }

    pub fn polyhomogeneous(order: f64, coefficient: f64) -> Result<Self> {
        if !order.is_finite() || !coefficient.is_finite() {
            return invalid("amplitude order and coefficient must be finite");
        }
        Ok(Self {
            order,
            form: AmplitudeForm::Polyhomogeneous { coefficient },
        })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn form(&self) -> &AmplitudeForm {
        &self.form
    }

    /// True when `a(t xi)` does not depend on `t` or `xi`.
    pub fn is_constant(&self) -> bool {
        matches!(self.form, AmplitudeForm::Constant(_))
    }

    #[inline]
    pub fn eval(&self, xi: &[f64]) -> f64 {
        match &self.form {
            AmplitudeForm::Constant(c) => *c,
            AmplitudeForm::ConicCutoff { axis, theta0 } => conic_value(axis, *theta0, xi),
            AmplitudeForm::Polyhomogeneous { coefficient } => {
                coefficient * (1.0 + xi.iter().map(|x| x * x).sum::<f64>()).powf(0.5 * self.order)
            }
        }
    }

    /// Largest `|d^beta a(xi)| / <xi>^{m - |beta|}` over `|beta| <= 2`, sampled at
    /// dyadic radii and spread directions with central differences.
    pub fn symbol_seminorm(&self, dim: usize) -> Result<f64> {
        check_dim(dim)?;
        let mut worst: f64 = 0.0;
        for dir in sample_directions(dim) {
            for j in 0..12 {
                let r = (j as f64).exp2();
                let xi: Vec<f64> = dir[..dim].iter().map(|x| x * r).collect();
                let weight = |k: i32| (1.0 + r * r).powf(0.5 * (self.order - k as f64));
                let h = 1e-3 * r.max(1.0);
                let at = |d: &[(usize, f64)]| {
                    let mut p = xi.clone();
                    for &(i, s) in d {
                        p[i] += s;
                    }
                    self.eval(&p)
                };
                worst = worst.max(self.eval(&xi).abs() / weight(0));
                for a in 0..dim {
                    let d1 = (at(&[(a, h)]) - at(&[(a, -h)])) / (2.0 * h);
                    worst = worst.max(d1.abs() / weight(1));
                    for b in a..dim {
                        let d2 = (at(&[(a, h), (b, h)]) - at(&[(a, h), (b, -h)])
                            - at(&[(a, -h), (b, h)])
                            + at(&[(a, -h), (b, -h)]))
                            / (4.0 * h * h);
                        worst = worst.max(d2.abs() / weight(2));
                    }
                }
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn euclidean_and_anisotropic_pass_validation() {
        assert!(PhaseSpec::euclidean(2).unwrap().validate().unwrap() < 1e-14);
        assert!(PhaseSpec::euclidean(3).unwrap().validate().is_ok());
        assert!(PhaseSpec::diagonal(&[1.0, 1.3]).unwrap().validate().is_ok());
        assert!(PhaseSpec::zero(2).unwrap().validate().is_err());
        assert!(PhaseSpec::diagonal(&[1.0, -1.0]).is_err());
        assert!(PhaseSpec::anisotropic(vec![vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let phi = PhaseSpec::diagonal(&[1.0, 1.3, 0.7]).unwrap();
        let xi = [0.3, -1.2, 2.0];
        let g = phi.gradient(&xi);
        for a in 0..3 {
            let mut p = xi;
            let mut m = xi;
            p[a] += 1e-6;
            m[a] -= 1e-6;
            let fd = (phi.eval(&p) - phi.eval(&m)) / 2e-6;
            assert!((fd - g[a]).abs() < 1e-8);
        }
    }

    #[test]
    fn amplitude_seminorms_are_finite() {
        let cut = AmplitudeSpec::conic_cutoff(&[1.0, 0.0], 0.5).unwrap();
        let c = cut.symbol_seminorm(2).unwrap();
        assert!(c.is_finite() && c >= 1.0);
        let poly = AmplitudeSpec::polyhomogeneous(-0.5, 2.0).unwrap();
        let c = poly.symbol_seminorm(3).unwrap();
        assert!(c < 3.0, "{c}");
        assert!(AmplitudeSpec::conic_cutoff(&[1.0, 0.0], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn homogeneity(x in -50.0f64..50.0, y in -50.0f64..50.0, lam in 0.01f64..100.0) {
            prop_assume!(x.abs() + y.abs() > 1e-3);
            let phi = PhaseSpec::diagonal(&[1.0, 1.3]).unwrap();
            let a = phi.eval(&[lam * x, lam * y]);
            let b = lam * phi.eval(&[x, y]);
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }

        #[test]
        fn euler_identity(x in -5.0f64..5.0, y in -5.0f64..5.0, z in -5.0f64..5.0) {
            prop_assume!(x.abs() + y.abs() + z.abs() > 1e-3);
            let phi = PhaseSpec::diagonal(&[2.0, 1.0, 0.5]).unwrap();
            let xi = [x, y, z];
            let g = phi.gradient(&xi);
            let lhs: f64 = (0..3).map(|i| g[i] * xi[i]).sum();
            prop_assert!((lhs - phi.eval(&xi)).abs() < 1e-12 * phi.eval(&xi).max(1.0));
        }
    }
}
