//! Dense complex linear algebra for small matrices.
//!
//! The pipeline never needs more than a few hundred rows (the reduced
//! Krylov problems) or a few thousand (dense propagators up to ~12 qubits),
//! so everything here is a straightforward O(n³) dense algorithm:
//! Householder tridiagonalization with implicit-shift QL for Hermitian
//! eigenproblems, one-sided Jacobi for the SVD, and Hessenberg reduction
//! with shifted QR for general complex eigenvalues.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

mod general;
mod hermitian;
mod svd;

pub use general::eig_general;
pub use hermitian::eigh;
pub use svd::{svd, Svd};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from row-major data, rejecting NaN/Inf entries.
    pub fn from_data(
        rows: usize,
        cols: usize,
        data: Vec<Complex64>,
    ) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::ShapeMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
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

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// y = A x.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, xv)| a * xv).sum())
            .collect()
    }

    /// y = A† x without forming the adjoint.
    pub fn adjoint_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.rows, x.len());
        let mut y = vec![Complex64::new(0.0, 0.0); self.cols];
        for (r, xr) in x.iter().enumerate() {
            for (a, yc) in self.row(r).iter().zip(y.iter_mut()) {
                *yc += a.conj() * xr;
            }
        }
        y
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation |A - A†| over all entries.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in 0..=r {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Errors from the dense solvers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    ShapeMismatch { rows: usize, cols: usize, len: usize },
    NonFinite,
    NotSquare,
    NotHermitian,
    /// Iterative eigensolver failed to deflate; carries the iteration count.
    NoConvergence { iterations: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::ShapeMismatch { rows, cols, len } => {
                write!(f, "data length {len} does not fit a {rows}x{cols} matrix")
            }
            LinalgError::NonFinite => write!(f, "matrix contains NaN or Inf entries"),
            LinalgError::NotSquare => write!(f, "matrix must be square"),
            LinalgError::NotHermitian => write!(f, "matrix is not Hermitian"),
            LinalgError::NoConvergence { iterations } => {
                write!(f, "eigensolver did not converge after {iterations} iterations")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_data_rejects_nan() {
        let bad = vec![Complex64::new(f64::NAN, 0.0)];
        assert_eq!(
            DenseMatrix::from_data(1, 1, bad).unwrap_err(),
            LinalgError::NonFinite
        );
    }

    #[test]
    fn adjoint_and_matmul() {
        let a = DenseMatrix::from_data(
            2,
            2,
            vec![
                Complex64::new(1.0, 1.0),
                Complex64::new(0.0, 2.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(1.0, -1.0),
            ],
        )
        .unwrap();
        let prod = a.adjoint().matmul(&a);
        assert!(prod.hermitian_deviation() < 1e-15);
        assert_eq!(a.adjoint()[(0, 1)], Complex64::new(3.0, 0.0));
    }
}
