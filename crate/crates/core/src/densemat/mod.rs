//! Dense complex linear algebra for small operators.
//!
//! Everything here is sized for matrices from 2×2 up to a few hundred rows:
//! cyclic Jacobi for Hermitian eigenproblems, Hessenberg QR for general
//! spectra, eigen- or Padé-based matrix exponentials and LU solves.

mod eigen;
mod expm;
mod lu;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eigen::{eigenvalues_general, hermitian_eigen, EigenDecomposition, JACOBI_MAX_SWEEPS};
pub use expm::{expm, EXPM_NORM_LIMIT};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

/// JSON layout: `{"dim": d, "re": [...], "im": [...]}` with row-major entries.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = String;

    fn try_from(r: MatrixRepr) -> std::result::Result<Self, String> {
        let n = r.dim * r.dim;
        if r.dim == 0 || r.re.len() != n || r.im.len() != n {
            return Err(format!(
                "matrix of dim {} needs {} re and im entries, got {} and {}",
                r.dim,
                n,
                r.re.len(),
                r.im.len()
            ));
        }
        let data: Vec<C64> = r.re.iter().zip(&r.im).map(|(&a, &b)| C64::new(a, b)).collect();
        if data.iter().any(|z| !z.is_finite()) {
            return Err("matrix entries must be finite".into());
        }
        Ok(ComplexMatrix { dim: r.dim, data })
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr {
            dim: m.dim,
            re: m.data.iter().map(|z| z.re).collect(),
            im: m.data.iter().map(|z| z.im).collect(),
        }
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        ComplexMatrix { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row slices; all rows must have the same length as the row count.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidParams("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(ComplexMatrix { dim, data })
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    /// `(m + m†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        ComplexMatrix { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm of the part strictly off the diagonal.
    pub fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    s += self[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    /// Top-left `size × size` block.
    pub fn block(&self, size: usize) -> Self {
        assert!(size > 0 && size <= self.dim, "block size out of range");
        Self::from_fn(size, |i, j| self[(i, j)])
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "vector length must match matrix dimension");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Entrywise closeness in max norm.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> C64 {
        lu::determinant(self)
    }

    /// General inverse by LU with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        lu::inverse(self)
    }

    /// Solves `self · X = rhs`.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        lu::solve(self, rhs)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |i, j| self[(i / m, j / m)] * other[(i % m, j % m)])
    }

    fn check_same_dim(&self, other: &Self) {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self + &rhs
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.check_same_dim(rhs);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self - &rhs
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { dim: self.dim, data: self.data.iter().map(|z| -z).collect() }
    }
}

/// `‖m − m†‖_F`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            s += (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
        }
    }
    s.sqrt()
}

/// `‖m + m†‖_F`.
pub fn anti_hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            s += (m[(i, j)] + m[(j, i)].conj()).norm_sqr();
        }
    }
    s.sqrt()
}

/// Outcome of [`posdef_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosdefReport {
    pub positive: bool,
    pub min_eigenvalue: f64,
}

pub fn posdef_check(m: &ComplexMatrix, tol: f64) -> Result<PosdefReport> {
    let eig = hermitian_eigen(m, tol)?;
    let min_eigenvalue = eig.eigenvalues[0];
    Ok(PosdefReport { positive: min_eigenvalue > tol, min_eigenvalue })
}

/// Principal square root of a Hermitian positive-definite matrix.
pub fn sqrt_posdef(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(m, tol)?;
    let min_eigenvalue = eig.eigenvalues[0];
    if min_eigenvalue <= tol {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    Ok(eig.map_spectrum(|x| C64::new(x.sqrt(), 0.0)))
}

/// Standard inner product `⟨ψ|φ⟩`, antilinear in the first argument.
pub fn inner(psi: &[C64], phi: &[C64]) -> C64 {
    assert_eq!(psi.len(), phi.len(), "state dimensions differ");
    psi.iter().zip(phi).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hermiticity_defect_examples() {
        assert_eq!(hermiticity_defect(&ComplexMatrix::identity(3)), 0.0);
        let m = ComplexMatrix::from_rows(&[[ZERO, I], [I, ZERO]]).unwrap();
        // m − m† = [[0, 2i],[2i, 0]]
        assert!((hermiticity_defect(&m) - 2.0 * 2.0f64.sqrt()).abs() < 1e-15);
        // H₁(λ=1, κ=1) = −½[[2, i],[i, 0]]; m − m† = [[0, −i],[−i, 0]]
        let h1 = ComplexMatrix::from_rows(&[[c(-1.0, 0.0), c(0.0, -0.5)], [c(0.0, -0.5), ZERO]]).unwrap();
        assert!((hermiticity_defect(&h1) - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn posdef_examples() {
        let m = ComplexMatrix::from_real_rows(&[[5.0, 2.0], [2.0, 1.0]]).unwrap();
        let r = posdef_check(&m, 1e-10).unwrap();
        assert!(r.positive);
        assert!((r.min_eigenvalue - (3.0 - 2.0 * 2.0f64.sqrt())).abs() < 1e-14);

        let r = posdef_check(&ComplexMatrix::from_real_diag(&[1.0, 0.0]), 1e-10).unwrap();
        assert!(!r.positive);
        assert_eq!(r.min_eigenvalue, 0.0);

        let r = posdef_check(&ComplexMatrix::identity(2).scale_real(-1.0), 1e-10).unwrap();
        assert!(!r.positive);

        let nh = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(posdef_check(&nh, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_examples() {
        let id = ComplexMatrix::identity(3);
        assert!(sqrt_posdef(&id, 1e-10).unwrap().max_abs_diff(&id) < 1e-15);

        let r = sqrt_posdef(&ComplexMatrix::from_real_diag(&[4.0, 9.0]), 1e-10).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_real_diag(&[2.0, 3.0])) < 1e-15);

        let rho0 = ComplexMatrix::from_real_rows(&[[5.0, 2.0], [2.0, 1.0]]).unwrap();
        let eta0 = ComplexMatrix::from_real_rows(&[[3.0, 1.0], [1.0, 1.0]])
            .unwrap()
            .scale_real(std::f64::consts::FRAC_1_SQRT_2);
        assert!(sqrt_posdef(&rho0, 1e-10).unwrap().max_abs_diff(&eta0) < 1e-14);

        let singular = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(sqrt_posdef(&singular, 1e-10), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn kron_of_paulis() {
        let x = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let z = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        let xz = x.kron(&z);
        assert_eq!(xz.dim(), 4);
        assert_eq!(xz[(0, 2)], ONE);
        assert_eq!(xz[(1, 3)], -ONE);
        assert_eq!(xz[(0, 0)], ZERO);
    }

    #[test]
    fn json_layout() {
        let m = ComplexMatrix::from_rows(&[[ONE, I], [-I, c(2.0, 0.0)]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"dim":2,"re":[1.0,0.0,-0.0,2.0],"im":[0.0,1.0,-1.0,0.0]}"#);
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"dim":2,"re":[1],"im":[0]}"#).is_err());
    }
}
