//! Dense complex square matrices standing in for `B(H)` at finite dimension.

mod eigen;
mod svd;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};
use core::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};

pub use svd::singular_values_of_columns;

/// Default cap on operator dimension.
pub const DEFAULT_MAX_DIM: usize = 512;

static MAX_DIM: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_DIM);

/// Current dimension cap enforced by constructors.
pub fn max_dim() -> usize {
    MAX_DIM.load(Ordering::Relaxed)
}

/// Override the dimension cap (the CLI wires this to `ASMLAB_MAX_DIM`).
pub fn set_max_dim(dim: usize) {
    MAX_DIM.store(dim.max(1), Ordering::Relaxed);
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(invalid("operator dimension must be at least 1"));
    }
    let max = max_dim();
    if dim > max {
        return Err(Error::DimensionTooLarge { dim, max });
    }
    Ok(())
}

/// Numerical tolerances used by eigenvalue, positivity and rank decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eig_tol: f64,
    pub psd_tol: f64,
    pub rank_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eig_tol: 1e-10,
            psd_tol: 1e-9,
            rank_tol: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(eig_tol: f64, psd_tol: f64, rank_tol: f64) -> Result<Self> {
        for (name, v) in [("eig_tol", eig_tol), ("psd_tol", psd_tol), ("rank_tol", rank_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(alloc::format!("{name} must be strictly positive, got {v}")));
            }
        }
        Ok(Tolerance {
            eig_tol,
            psd_tol,
            rank_tol,
        })
    }
}

/// A `dim × dim` complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Operator {
    /// Build from row-major entries, validating dimension and finiteness.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("operator entries must be finite"));
        }
        Ok(Operator { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Operator::new(dim, data)
    }

    /// Real matrix from rows; convenient in tests and examples.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Operator::from_rows(&rows)
    }

    /// # Panics
    /// If `dim` is zero or above [`max_dim`].
    pub fn zeros(dim: usize) -> Self {
        check_dim(dim).expect("invalid operator dimension");
        Operator {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Operator::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Result<Self> {
        check_dim(values.len())?;
        let mut m = Operator::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(invalid("operator entries must be finite"));
        }
        Ok(m)
    }

    /// Rank-one operator `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                actual: v.len(),
            });
        }
        let dim = u.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in u {
            for b in v {
                data.push(a * b.conj());
            }
        }
        Operator::new(dim, data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Operator {
        let n = self.dim;
        let mut out = Operator::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, c: Complex64) -> Operator {
        Operator {
            dim: self.dim,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Operator {
        Operator {
            dim: self.dim,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// `self += c · other`, in place.
    pub fn axpy(&mut self, c: Complex64, other: &Operator) {
        assert_eq!(self.dim, other.dim, "operator dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn matmul(&self, other: &Operator) -> Operator {
        assert_eq!(self.dim, other.dim, "operator dimension mismatch");
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (k, a) in row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let src = &other.data[k * n..(k + 1) * n];
                for (d, b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Operator { dim: n, data: out }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Result<Operator> {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        check_dim(dim)?;
        let mut out = Operator::zeros(dim);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "vector dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest absolute entry; a cheap upper proxy, not the operator norm.
    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Operator norm (largest singular value).
    pub fn norm(&self) -> f64 {
        if self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            return 0.0;
        }
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let n = self.dim;
        let cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| self[(i, j)]).collect()).collect();
        singular_values_of_columns(cols)
    }

    /// `‖M − M*‖`.
    pub fn hermitian_defect(&self) -> f64 {
        (self - &self.adjoint()).norm()
    }

    pub fn is_hermitian(&self, tol: &Tolerance) -> bool {
        self.hermitian_defect() <= tol.eig_tol
    }

    /// Hermitian part `(M + M*)/2`.
    pub fn hermitian_part(&self) -> Operator {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// Principal sub-block with the given row and column index ranges,
    /// returned as column vectors (for rectangular singular values).
    pub fn block_columns(&self, rows: core::ops::Range<usize>, cols: core::ops::Range<usize>) -> Vec<Vec<Complex64>> {
        cols.map(|j| rows.clone().map(|i| self[(i, j)]).collect()).collect()
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        self.matmul(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

/// Operator norm with an explicit finiteness check.
pub fn op_norm(m: &Operator) -> Result<f64> {
    if !m.is_finite() {
        return Err(invalid("operator has non-finite entries"));
    }
    Ok(m.norm())
}

/// Spectral decomposition `M = U diag(values) U*` with ascending `values`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Unitary whose columns are the eigenvectors.
    pub vectors: Operator,
}

impl HermitianEigen {
    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `U diag(f(λ)) U*`.
    pub fn rebuild(&self, f: impl Fn(f64) -> f64) -> Operator {
        let n = self.vectors.dim();
        let fvals: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = Operator::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &fk) in fvals.iter().enumerate() {
                    if fk != 0.0 {
                        acc += self.vectors[(i, k)] * self.vectors[(j, k)].conj() * fk;
                    }
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

pub fn hermitian_eig(m: &Operator, tol: &Tolerance) -> Result<HermitianEigen> {
    if !m.is_finite() {
        return Err(invalid("operator has non-finite entries"));
    }
    let defect = m.hermitian_defect();
    if defect > tol.eig_tol {
        return Err(invalid(alloc::format!(
            "operator is not Hermitian: ‖M − M*‖ = {defect:e}"
        )));
    }
    let (values, vectors) = eigen::jacobi_hermitian(&m.hermitian_part());
    Ok(HermitianEigen {
        values,
        vectors: Operator {
            dim: m.dim,
            data: vectors,
        },
    })
}

/// Functional calculus `f(M)` for Hermitian `M`.
pub fn fun_calc(m: &Operator, f: impl Fn(f64) -> f64, tol: &Tolerance) -> Result<Operator> {
    let eig = hermitian_eig(m, tol)?;
    Ok(eig.rebuild(f))
}

/// Spectral projection `χ_{(c,∞)}(M)`; errors if an eigenvalue sits within
/// `eig_tol` of `c`.
pub fn spectral_projection_above(m: &Operator, c: f64, tol: &Tolerance) -> Result<Operator> {
    let eig = hermitian_eig(m, tol)?;
    if let Some(&l) = eig.values.iter().find(|&&l| (l - c).abs() <= tol.eig_tol) {
        return Err(Error::DegenerateSpectrum {
            eigenvalue: l,
            threshold: c,
        });
    }
    Ok(eig.rebuild(|l| if l > c { 1.0 } else { 0.0 }))
}

/// Hermitian within `eig_tol` and spectrum bounded below by `−psd_tol`.
pub fn is_positive(m: &Operator, tol: &Tolerance) -> bool {
    match hermitian_eig(m, tol) {
        Ok(eig) => eig.values.first().is_none_or(|&l| l >= -tol.psd_tol),
        Err(_) => false,
    }
}

/// Number of singular values above `rank_tol · max(1, ‖M‖)`.
pub fn rank_tol(m: &Operator, tol: &Tolerance) -> usize {
    let sv = m.singular_values();
    let scale = sv.first().copied().unwrap_or(0.0).max(1.0);
    sv.iter().filter(|&&s| s > tol.rank_tol * scale).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma1() -> Operator {
        Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn sigma3() -> Operator {
        Operator::diag_real(&[1.0, -1.0]).unwrap()
    }

    #[test]
    fn norms_of_basic_operators() {
        assert!((op_norm(&Operator::identity(2)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(op_norm(&Operator::zeros(3)).unwrap(), 0.0);
        assert!((op_norm(&sigma1()).unwrap() - 1.0).abs() < 1e-14);
        let m = Operator::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        // σ_max of [[1,2],[3,4]] = sqrt((30 + sqrt(884)) / 2), from AᵀA = [[10,14],[14,20]]
        let expect = ((30.0 + 884f64.sqrt()) / 2.0).sqrt();
        assert!((m.norm() - expect).abs() < 1e-13);
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(Operator::new(1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(Operator::new(0, vec![]).is_err());
        assert!(matches!(
            Operator::new(2, vec![c(0.0, 0.0); 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eig_of_paulis() {
        let tol = Tolerance::default();
        let e = hermitian_eig(&sigma3(), &tol).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);

        let e = hermitian_eig(&sigma1(), &tol).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        // eigenvector for -1 is (1,-1)/√2 up to phase
        let v = e.vector(0);
        let r = 0.5f64.sqrt();
        let overlap = (v[0] * r - v[1] * r).norm();
        assert!((overlap - 1.0).abs() < 1e-12);

        let e = hermitian_eig(&Operator::diag_real(&[2.0, 2.0]).unwrap(), &tol).unwrap();
        assert_eq!(e.values, vec![2.0, 2.0]);
        let u = &e.vectors;
        assert!((&(&u.adjoint() * u) - &Operator::identity(2)).norm() < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            hermitian_eig(&m, &Tolerance::default()),
            Err(Error::InvalidInput(_))
        ));
        assert!(fun_calc(&m, |x| x, &Tolerance::default()).is_err());
        assert!(!is_positive(&m, &Tolerance::default()));
    }

    #[test]
    fn functional_calculus_examples() {
        let tol = Tolerance::default();
        let p = spectral_projection_above(&sigma3(), 0.0, &tol).unwrap();
        assert!((&p - &Operator::diag_real(&[1.0, 0.0]).unwrap()).norm() < 1e-15);

        let m = Operator::from_rows(&[vec![c(2.0, 0.0), c(0.5, -1.0)], vec![c(0.5, 1.0), c(-1.0, 0.0)]]).unwrap();
        let id = fun_calc(&m, |x| x, &tol).unwrap();
        assert!((&id - &m).norm() <= 1e-9 * m.norm());

        let s = fun_calc(&Operator::diag_real(&[4.0, 9.0]).unwrap(), f64::sqrt, &tol).unwrap();
        assert!((&s - &Operator::diag_real(&[2.0, 3.0]).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn threshold_inside_band_is_degenerate() {
        let tol = Tolerance::default();
        let m = Operator::diag_real(&[0.5, 1.0]).unwrap();
        assert!(matches!(
            spectral_projection_above(&m, 0.5, &tol),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn positivity_examples() {
        let tol = Tolerance::default();
        assert!(is_positive(&Operator::identity(3), &tol));
        assert!(!is_positive(&sigma3(), &tol));
        let half = (&Operator::identity(2) + &sigma3().scale_real(0.5)).scale_real(0.5);
        assert!(is_positive(&half, &tol));
    }

    #[test]
    fn rank_examples() {
        let tol = Tolerance::default();
        assert_eq!(rank_tol(&Operator::diag_real(&[1.0, 1e-14]).unwrap(), &tol), 1);
        assert_eq!(rank_tol(&Operator::zeros(4), &tol), 0);
        let r = 0.5f64.sqrt();
        let h = Operator::from_real_rows(&[&[r, r], &[r, -r]]).unwrap();
        assert_eq!(rank_tol(&h, &tol), 2);
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(Tolerance::new(0.0, 1e-9, 1e-8).is_err());
        assert!(Tolerance::new(1e-10, 1e-9, 1e-8).is_ok());
    }

    #[test]
    fn dimension_cap_enforced() {
        assert!(matches!(
            Operator::new(DEFAULT_MAX_DIM + 1, vec![]),
            Err(Error::DimensionTooLarge { .. })
        ));
    }
}
