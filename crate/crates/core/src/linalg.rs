//! Dense complex Hermitian linear algebra.
//!
//! [`ComplexMatrix`] is a plain row-major container. Eigendecompositions are
//! delegated to `faer` (sequential mode, so results do not depend on the
//! thread pool) and then canonicalised: eigenvalues ascending, numerically
//! degenerate clusters rotated onto their position-ordered basis, and every
//! eigenvector phase-fixed. Downstream edge-state selection relies on that
//! ordering being reproducible bit for bit.

use std::ops::{Index, IndexMut};

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd;
use faer::{Mat, Par};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative tolerance used by the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues closer than this (relative to the spectral radius) form a cluster.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// The matrix whose columns are `columns`.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::ShapeMismatch("columns of unequal length".into()));
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    pub fn pauli_x() -> Self {
        Self { rows: 2, cols: 2, data: vec![ZERO, ONE, ONE, ZERO] }
    }

    pub fn pauli_y() -> Self {
        Self { rows: 2, cols: 2, data: vec![ZERO, -I, I, ZERO] }
    }

    pub fn pauli_z() -> Self {
        Self { rows: 2, cols: 2, data: vec![ONE, ZERO, ZERO, -ONE] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max_ij |A_ij - conj(A_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && self.hermiticity_defect() <= HERMITIAN_TOL * self.max_abs()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let product = self.to_faer() * other.to_faer();
        Ok(Self::from_faer(product.as_ref()))
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub(crate) fn to_faer(&self) -> Mat<C64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub(crate) fn from_faer(m: faer::MatRef<'_, C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// ⟨a|b⟩ with the first argument conjugated.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Full spectrum and eigenbasis of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector of `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.eigenvectors.column(i)
    }

    /// V diag(λ) V†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|l| v[(i, l)] * self.eigenvalues[l] * v[(j, l)].conj()).sum()
        })
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max)
    }
}

fn raw_eigh(a: &ComplexMatrix, vectors: bool) -> Result<(Vec<f64>, Option<Mat<C64>>)> {
    let n = a.rows();
    let m = a.to_faer();
    let par = Par::Seq;
    let mut s = faer::diag::Diag::<C64>::zeros(n);
    let compute = if vectors { evd::ComputeEigenvectors::Yes } else { evd::ComputeEigenvectors::No };
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<C64>(n, compute, par, Default::default()));
    let mut u = if vectors { Some(Mat::<C64>::zeros(n, n)) } else { None };
    evd::self_adjoint_evd(
        m.as_ref(),
        s.as_mut(),
        u.as_mut().map(|u| u.as_mut()),
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|_| Error::ConvergenceFailure)?;
    let values = (0..n).map(|i| s[i].re).collect();
    Ok((values, u))
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    let defect = a.hermiticity_defect();
    let tolerance = HERMITIAN_TOL * a.max_abs();
    if defect > tolerance {
        return Err(Error::NonHermitianInput { defect, tolerance });
    }
    Ok(())
}

/// Rotates `v` so that its first component of at least half the maximal
/// magnitude is real and positive.
fn fix_phase(v: &mut [C64]) {
    let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return;
    }
    if let Some(anchor) = v.iter().find(|z| z.norm() >= 0.5 * peak) {
        let phase = anchor.conj() / anchor.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Eigendecomposition of a Hermitian matrix with a deterministic basis.
///
/// Within a cluster of eigenvalues closer than `DEGENERACY_TOL * ‖A‖` the
/// returned vectors diagonalise the basis-index operator restricted to the
/// cluster, ordered from most left-weighted to most right-weighted (ties by
/// first nonzero component). For a lattice ordered site-major this is the
/// order of descending weight near the first site.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    check_hermitian(a)?;
    let n = a.rows();
    if n == 0 {
        return Ok(EigenDecomposition { eigenvalues: vec![], eigenvectors: ComplexMatrix::zeros(0, 0) });
    }
    let (mut values, u) = raw_eigh(a, true)?;
    let u = u.expect("eigenvectors requested");
    let mut columns: Vec<Vec<C64>> = (0..n).map(|j| (0..n).map(|i| u[(i, j)]).collect()).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
    values = order.iter().map(|&i| values[i]).collect();
    columns = order.iter().map(|&i| columns[i].clone()).collect();

    let scale = values.iter().map(|e| e.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = DEGENERACY_TOL * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            canonicalize_cluster(&mut columns[start..end])?;
        }
        start = end;
    }
    for c in columns.iter_mut() {
        fix_phase(c);
    }
    let eigenvectors = ComplexMatrix::from_columns(n, &columns)?;
    Ok(EigenDecomposition { eigenvalues: values, eigenvectors })
}

fn canonicalize_cluster(cluster: &mut [Vec<C64>]) -> Result<()> {
    let k = cluster.len();
    let position = ComplexMatrix::from_fn(k, k, |a, b| {
        cluster[a]
            .iter()
            .zip(&cluster[b])
            .enumerate()
            .map(|(i, (x, y))| x.conj() * y * i as f64)
            .sum()
    });
    // Symmetrise away rounding before the small eigensolve.
    let position = ComplexMatrix::from_fn(k, k, |a, b| 0.5 * (position[(a, b)] + position[(b, a)].conj()));
    let (_, rot) = raw_eigh(&position, true)?;
    let rot = rot.expect("eigenvectors requested");
    let dim = cluster[0].len();
    let mut rotated: Vec<Vec<C64>> = (0..k)
        .map(|c| {
            (0..dim).map(|i| (0..k).map(|a| cluster[a][i] * rot[(a, c)]).sum()).collect()
        })
        .collect();
    let first_nonzero = |v: &Vec<C64>| v.iter().position(|z| z.norm() > 1e-8).unwrap_or(dim);
    let mean_position = |v: &Vec<C64>| {
        v.iter().enumerate().map(|(i, z)| z.norm_sqr() * i as f64).sum::<f64>()
    };
    rotated.sort_by(|x, y| {
        let (px, py) = (mean_position(x), mean_position(y));
        if (px - py).abs() > 1e-9 * dim as f64 {
            px.total_cmp(&py)
        } else {
            first_nonzero(x).cmp(&first_nonzero(y))
        }
    });
    cluster.clone_from_slice(&rotated);
    Ok(())
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    let (mut values, _) = raw_eigh(a, false)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// P = Σ_{l < n_occ} v_l v_l†.
pub fn spectral_projector(eig: &EigenDecomposition, n_occ: usize) -> Result<ComplexMatrix> {
    let dim = eig.dim();
    if n_occ == 0 || n_occ > dim {
        return Err(Error::InvalidOccupation { n_occ, dim });
    }
    let v = &eig.eigenvectors;
    Ok(ComplexMatrix::from_fn(dim, dim, |i, j| {
        (0..n_occ).map(|l| v[(i, l)] * v[(j, l)].conj()).sum()
    }))
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    if a.is_hermitian() {
        let values = hermitian_eigenvalues(a)?;
        return Ok(values.iter().map(|e| e.abs()).fold(0.0, f64::max));
    }
    let gram = a.adjoint().matmul(a)?;
    let gram = ComplexMatrix::from_fn(gram.rows(), gram.cols(), |i, j| {
        0.5 * (gram[(i, j)] + gram[(j, i)].conj())
    });
    let values = hermitian_eigenvalues(&gram)?;
    Ok(values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn pauli_x_spectrum() {
        let eig = hermitian_eig(&ComplexMatrix::pauli_x()).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_uses_index_order() {
        let eig = hermitian_eig(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0; 4]);
        for l in 0..4 {
            let v = eig.vector(l);
            assert!((v[l] - ONE).norm() < 1e-12, "column {l}: {v:?}");
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_major(2, 2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NonHermitianInput { .. })));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn projector_edge_cases() {
        let eig = hermitian_eig(&ComplexMatrix::pauli_z()).unwrap();
        let p = spectral_projector(&eig, 1).unwrap();
        let expected = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        assert!(p.sub(&expected).unwrap().max_abs() < 1e-15);
        let full = spectral_projector(&eig, 2).unwrap();
        assert!(full.sub(&ComplexMatrix::identity(2)).unwrap().max_abs() < 1e-15);
        assert!(matches!(spectral_projector(&eig, 0), Err(Error::InvalidOccupation { .. })));
        assert!(matches!(spectral_projector(&eig, 3), Err(Error::InvalidOccupation { .. })));
    }

    #[test]
    fn norms() {
        assert!((operator_norm(&ComplexMatrix::pauli_y()).unwrap() - 1.0).abs() < 1e-14);
        let three = ComplexMatrix::identity(3).scale(c(3.0));
        assert!((operator_norm(&three).unwrap() - 3.0).abs() < 1e-14);
        // Nilpotent, so the singular value route is taken.
        let m = ComplexMatrix::from_row_major(2, 2, vec![ZERO, c(2.0), ZERO, ZERO]).unwrap();
        assert!((operator_norm(&m).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kron_and_products() {
        let x = ComplexMatrix::pauli_x();
        let y = ComplexMatrix::pauli_y();
        let z = ComplexMatrix::pauli_z();
        // σx σy = i σz
        let xy = x.matmul(&y).unwrap();
        assert!(xy.sub(&z.scale(I)).unwrap().max_abs() < 1e-15);
        let k = ComplexMatrix::identity(2).kron(&z);
        assert_eq!(k.rows(), 4);
        assert_eq!(k[(3, 3)], -ONE);
        assert_eq!(k[(2, 2)], ONE);
    }
}
