//! Dense complex matrix kernel.
//!
//! `ComplexMatrix` is an immutable value type over a column-major
//! `nalgebra::DMatrix<Complex<f64>>`; every operation returns a new matrix.
//! Hermitian eigendecompositions are delegated to nalgebra's symmetric
//! eigensolver and re-sorted in descending order.
//!
//! Tolerances are fixed module constants sized for double precision on
//! problems of dimension up to ~100.

use std::ops::{Add, Mul, Sub};

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Complex double.
pub type C64 = Complex<f64>;

/// Column state vector.
pub type Ket = DVector<C64>;

/// Entrywise Hermiticity tolerance (scaled by `max(1, max|A_ij|)`).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue still accepted as PSD.
pub const PSD_SLACK: f64 = 1e-9;
/// Eigenvalues below this are treated as exact zeros by pseudo-inverses.
pub const KERNEL_CUTOFF: f64 = 1e-10;
/// Relative Frobenius reconstruction tolerance of an eigendecomposition.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

const UNIT_DIAGONAL_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Builds a matrix from a row-major entry buffer.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::BadShape {
                expected: 1,
                got: 0,
            });
        }
        if entries.len() != rows * cols {
            return Err(Error::BadShape {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                c64(diag[i], 0.0)
            } else {
                C64::default()
            }
        })
    }

    /// `|a><b|`.
    pub fn outer(a: &Ket, b: &Ket) -> Self {
        Self(a * b.adjoint())
    }

    /// Rank-one projector `|v><v|` (not renormalized).
    pub fn projector(v: &Ket) -> Self {
        Self::outer(v, v)
    }

    /// Projector onto the span of the given columns, assumed orthonormal.
    pub fn span_projector(columns: &[Ket]) -> Self {
        let dim = columns.first().map_or(0, |c| c.len());
        columns
            .iter()
            .fold(Self::zeros(dim, dim), |acc, c| &acc + &Self::projector(c))
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Real part of the trace.
    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    /// `tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols(), other.rows());
        assert_eq!(self.rows(), other.cols());
        let mut acc = C64::default();
        for i in 0..self.rows() {
            for k in 0..self.cols() {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_ij |A_ij - conj(A_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= HERMITIAN_TOL * self.max_abs().max(1.0)
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    /// `<v|A|v>`, real part.
    pub fn expectation(&self, v: &Ket) -> f64 {
        v.dotc(&(&self.0 * v)).re
    }

    pub fn apply(&self, v: &Ket) -> Ket {
        &self.0 * v
    }

    /// Column `j` as a ket.
    pub fn column(&self, j: usize) -> Ket {
        self.0.column(j).into_owned()
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(blocks: &[&Self]) -> Self {
        let rows: usize = blocks.iter().map(|b| b.rows()).sum();
        let cols: usize = blocks.iter().map(|b| b.cols()).sum();
        let mut m = DMatrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            m.view_mut((r0, c0), (b.rows(), b.cols())).copy_from(&b.0);
            r0 += b.rows();
            c0 += b.cols();
        }
        Self(m)
    }

    /// Zero-pads a square matrix into the top-left corner of a `dim x dim` matrix.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NonSquare(self.rows(), self.cols()));
        }
        if dim < self.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.rows(),
                got: dim,
            });
        }
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (self.rows(), self.cols()))
            .copy_from(&self.0);
        Ok(Self(m))
    }

    fn require_same_shape(&self, other: &Self) {
        assert_eq!(
            (self.rows(), self.cols()),
            (other.rows(), other.cols()),
            "matrix shape mismatch"
        );
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.require_same_shape(rhs);
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.require_same_shape(rhs);
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols(), rhs.rows(), "matrix product shape mismatch");
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows())
            .map(|i| {
                (0..self.cols())
                    .map(|j| {
                        let z = self.0[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        let entries: Vec<C64> = rows.iter().flatten().map(|p| c64(p[0], p[1])).collect();
        ComplexMatrix::from_row_major(nrows, ncols, &entries).map_err(serde::de::Error::custom)
    }
}

/// Eigenvalues in descending order with matching unitary eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, i: usize) -> Ket {
        self.eigenvectors.column(i)
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = self.eigenvectors.as_matrix();
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            scaled.column_mut(j).scale_mut(s);
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| x)
    }
}

fn check_square(a: &ComplexMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NonSquare(a.rows(), a.cols()))
    }
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    check_square(a)?;
    let err = a.hermiticity_error();
    if err > HERMITIAN_TOL * a.max_abs().max(1.0) {
        return Err(Error::NonHermitian(err));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    check_hermitian(a)?;
    let n = a.rows();
    let sym = a.hermitian_part().into_matrix();
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON, 10_000 * n.max(1))
        .ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: ComplexMatrix(eigenvectors),
    })
}

pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(*hermitian_eig(a)?
        .eigenvalues
        .last()
        .expect("matrix has at least one row"))
}

pub fn max_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(a)?.eigenvalues[0])
}

/// Applies `f` to the spectrum of a PSD matrix after clipping eigenvalues in
/// `[-PSD_SLACK, 0)` to zero.
pub fn mat_func(a: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let eig = psd_eig(a)?;
    Ok(eig.map_spectrum(|lam| f(lam.max(0.0))))
}

pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    mat_func(a, f64::sqrt)
}

/// Pseudo-inverse square root: eigenvalues below `KERNEL_CUTOFF` map to zero.
pub fn inv_sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    mat_func(a, inv_sqrt_scalar)
}

pub(crate) fn inv_sqrt_scalar(lam: f64) -> f64 {
    if lam < KERNEL_CUTOFF {
        0.0
    } else {
        1.0 / lam.sqrt()
    }
}

/// Eigendecomposition that additionally enforces `min eig >= -PSD_SLACK`.
pub fn psd_eig(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    let eig = hermitian_eig(a)?;
    let min = *eig.eigenvalues.last().expect("non-empty");
    if min < -PSD_SLACK {
        return Err(Error::NotPsd(min));
    }
    Ok(eig)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(a)?.eigenvalues.iter().map(|x| x.abs()).sum())
}

/// Number of eigenvalues above `KERNEL_CUTOFF`.
pub fn numerical_rank(a: &ComplexMatrix) -> Result<usize> {
    Ok(hermitian_eig(a)?
        .eigenvalues
        .iter()
        .filter(|&&x| x > KERNEL_CUTOFF)
        .count())
}

/// Unit vectors `v_i` of dimension `rank(G)` whose Gram matrix is `G`.
pub fn vectors_from_gram(g: &ComplexMatrix) -> Result<Vec<Ket>> {
    check_square(g)?;
    let diag_dev = (0..g.rows())
        .map(|i| (g.get(i, i) - c64(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    if diag_dev > UNIT_DIAGONAL_TOL {
        return Err(Error::NonUnitDiagonal(diag_dev));
    }
    let eig = psd_eig(g)?;
    let n = g.rows();
    let kept: Vec<usize> = (0..n)
        .filter(|&k| eig.eigenvalues[k] > KERNEL_CUTOFF)
        .collect();
    // W = sqrt(Lambda) V^dagger, restricted to the retained eigenvalues.
    let v = eig.eigenvectors.as_matrix();
    Ok((0..n)
        .map(|i| {
            let mut w = Ket::from_fn(kept.len(), |r, _| {
                let k = kept[r];
                v[(i, k)].conj() * eig.eigenvalues[k].sqrt()
            });
            let norm = w.norm();
            if norm > 0.0 {
                w.unscale_mut(norm);
            }
            w
        })
        .collect())
}

/// Gram matrix `G_ij = <v_i|v_j>`.
pub fn gram_matrix(vectors: &[Ket]) -> ComplexMatrix {
    let n = vectors.len();
    ComplexMatrix::from_fn(n, n, |i, j| vectors[i].dotc(&vectors[j]))
}

/// Which tensor factor to trace out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOut {
    First,
    Second,
}

/// Partial trace of an operator on `C^{d_first} (x) C^{d_second}`.
pub fn partial_trace(
    a: &ComplexMatrix,
    d_first: usize,
    d_second: usize,
    which: TraceOut,
) -> Result<ComplexMatrix> {
    check_square(a)?;
    if d_first * d_second != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: d_first * d_second,
            got: a.rows(),
        });
    }
    let m = a.as_matrix();
    Ok(match which {
        TraceOut::First => ComplexMatrix::from_fn(d_second, d_second, |i, j| {
            (0..d_first)
                .map(|k| m[(k * d_second + i, k * d_second + j)])
                .sum()
        }),
        TraceOut::Second => ComplexMatrix::from_fn(d_first, d_first, |i, j| {
            (0..d_second)
                .map(|k| m[(i * d_second + k, j * d_second + k)])
                .sum()
        }),
    })
}

pub fn normalize(v: &Ket) -> Ket {
    let n = v.norm();
    if n == 0.0 {
        v.clone()
    } else {
        v.unscale(n)
    }
}

/// Standard basis vector `|e_i>` in dimension `dim`.
pub fn basis_ket(dim: usize, i: usize) -> Ket {
    let mut v = Ket::zeros(dim);
    v[i] = c64(1.0, 0.0);
    v
}

/// Zero-pads a ket to dimension `dim`.
pub fn embed_ket(v: &Ket, dim: usize) -> Result<Ket> {
    if dim < v.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            got: dim,
        });
    }
    let mut out = Ket::zeros(dim);
    out.rows_mut(0, v.len()).copy_from(v);
    Ok(out)
}
