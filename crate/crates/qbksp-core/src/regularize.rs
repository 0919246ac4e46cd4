//! Singular-value regularization of the generalized eigenvalue problem.
//!
//! The overlap matrix S of a Krylov basis becomes ill-conditioned as the
//! basis approaches linear dependence, and measurement noise turns the
//! small singular directions into garbage. Both T and S are projected onto
//! the SVD basis of S and the directions with singular values at or below
//! the threshold are dropped before solving the reduced problem.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::linalg::{eig_general, svd, DenseMatrix, LinalgError};

/// What the truncation kept.
#[derive(Debug, Clone)]
pub struct RegularizationReport {
    /// All singular values of S, descending.
    pub singular_values: Vec<f64>,
    /// Number of retained directions; the retained set is the prefix
    /// `0..retained` of the descending order.
    pub retained: usize,
    /// Threshold the values were compared against.
    pub sigma: f64,
}

impl RegularizationReport {
    pub fn smallest_retained(&self) -> Option<f64> {
        self.retained
            .checked_sub(1)
            .and_then(|i| self.singular_values.get(i).copied())
    }

    pub fn largest_discarded(&self) -> Option<f64> {
        self.singular_values.get(self.retained).copied()
    }
}

/// Project T and S onto the SVD basis of S and keep the directions with
/// singular values above `sigma`. The projected S is exactly the diagonal
/// of retained singular values.
pub fn regularize(
    t: &DenseMatrix,
    s: &DenseMatrix,
    sigma: f64,
) -> Result<(DenseMatrix, DenseMatrix, RegularizationReport), RegularizeError> {
    if !t.is_square() || !s.is_square() || t.rows() != s.rows() {
        return Err(RegularizeError::ShapeMismatch {
            t_rows: t.rows(),
            s_rows: s.rows(),
        });
    }
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(RegularizeError::BadThreshold(sigma));
    }
    let f = svd(s).map_err(RegularizeError::Linalg)?;
    let retained = f.sigma.iter().take_while(|&&v| v > sigma).count();
    if retained == 0 {
        return Err(RegularizeError::AllTruncated {
            sigma,
            largest: f.sigma.first().copied().unwrap_or(0.0),
        });
    }
    // restricted products U_r† M V_r, touching only the retained columns
    let project = |m: &DenseMatrix| -> DenseMatrix {
        let mut out = DenseMatrix::zeros(retained, retained);
        for i in 0..retained {
            // row i of U† M = (M† u_i)†
            let u_i = f.u.column(i);
            let mu = m.adjoint_matvec(&u_i);
            for j in 0..retained {
                // V column j is row j of Vh, conjugated
                let acc: Complex64 = mu
                    .iter()
                    .enumerate()
                    .map(|(k, m)| m.conj() * f.vh[(j, k)].conj())
                    .sum();
                out[(i, j)] = acc;
            }
        }
        out
    };
    let t_red = project(t);
    let s_red = project(s);
    let report = RegularizationReport {
        singular_values: f.sigma,
        retained,
        sigma,
    };
    Ok((t_red, s_red, report))
}

/// Solve the reduced problem T̃ x = λ S̃ x. S̃ is diagonal with positive
/// entries by construction, so the similarity-equivalent balanced form
/// S̃^{-1/2} T̃ S̃^{-1/2} is handed to the dense eigensolver.
pub fn solve_reduced(
    t_red: &DenseMatrix,
    s_red: &DenseMatrix,
) -> Result<Vec<Complex64>, RegularizeError> {
    let n = t_red.rows();
    if !t_red.is_square() || !s_red.is_square() || s_red.rows() != n {
        return Err(RegularizeError::ShapeMismatch {
            t_rows: t_red.rows(),
            s_rows: s_red.rows(),
        });
    }
    let mut inv_sqrt = Vec::with_capacity(n);
    for i in 0..n {
        let d = s_red[(i, i)].re;
        if !d.is_finite() || d <= 0.0 {
            return Err(RegularizeError::NonPositiveOverlap { index: i, value: d });
        }
        inv_sqrt.push(1.0 / libm::sqrt(d));
    }
    let mut balanced = DenseMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            balanced[(r, c)] = t_red[(r, c)] * inv_sqrt[r] * inv_sqrt[c];
        }
    }
    eig_general(&balanced).map_err(RegularizeError::Linalg)
}

/// Errors from regularization and the reduced solve.
#[derive(Debug, Clone, PartialEq)]
pub enum RegularizeError {
    ShapeMismatch { t_rows: usize, s_rows: usize },
    BadThreshold(f64),
    /// Every singular value fell at or below the threshold; sigma is too
    /// large for the noise level of the matrix elements.
    AllTruncated { sigma: f64, largest: f64 },
    NonPositiveOverlap { index: usize, value: f64 },
    Linalg(LinalgError),
}

impl fmt::Display for RegularizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularizeError::ShapeMismatch { t_rows, s_rows } => {
                write!(f, "T ({t_rows} rows) and S ({s_rows} rows) must be square and equal")
            }
            RegularizeError::BadThreshold(s) => write!(f, "invalid threshold {s}"),
            RegularizeError::AllTruncated { sigma, largest } => write!(
                f,
                "threshold {sigma:.3e} removed every direction (largest singular value {largest:.3e})"
            ),
            RegularizeError::NonPositiveOverlap { index, value } => {
                write!(f, "reduced overlap diagonal {index} is not positive: {value:.3e}")
            }
            RegularizeError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for RegularizeError {}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
        m
    }

    #[test]
    fn identity_overlap_is_untouched() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_matrix(4, &mut rng);
        let s = DenseMatrix::identity(4);
        let (t_red, s_red, report) = regularize(&t, &s, 0.5).unwrap();
        assert_eq!(report.retained, 4);
        for i in 0..4 {
            assert!((s_red[(i, i)] - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
        // T̃ = U† T V equals T up to the unitary basis of S = I; its
        // eigenvalues must match
        let mut e1 = eig_general(&t).unwrap();
        let mut e2 = eig_general(&t_red).unwrap();
        let key = |z: &Complex64| (z.re, z.im);
        e1.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        e2.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (a, b) in e1.iter().zip(&e2) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn projected_overlap_is_diagonal_of_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_matrix(6, &mut rng);
        // Hermitian positive-ish overlap
        let g = random_matrix(6, &mut rng);
        let s = g.adjoint().matmul(&g);
        let (_, s_red, report) = regularize(&t, &s, 1e-12).unwrap();
        for i in 0..report.retained {
            for j in 0..report.retained {
                let want = if i == j {
                    Complex64::new(report.singular_values[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!(
                    (s_red[(i, j)] - want).norm() <= 1e-10 * report.singular_values[0],
                    "entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn all_truncated_is_an_error() {
        let t = DenseMatrix::identity(3);
        let s = DenseMatrix::identity(3);
        match regularize(&t, &s, 10.0) {
            Err(RegularizeError::AllTruncated { .. }) => {}
            other => panic!("expected AllTruncated, got {other:?}"),
        }
    }

    #[test]
    fn scalar_reduced_solve() {
        let mut t = DenseMatrix::zeros(1, 1);
        t[(0, 0)] = 2.0 * Complex64::new(libm::cos(1.0), -libm::sin(1.0));
        let mut s = DenseMatrix::zeros(1, 1);
        s[(0, 0)] = Complex64::new(4.0, 0.0);
        let lam = solve_reduced(&t, &s).unwrap();
        let want = 0.5 * Complex64::new(libm::cos(1.0), -libm::sin(1.0));
        assert!((lam[0] - want).norm() < 1e-12);
    }

    #[test]
    fn diagonal_phases_recovered() {
        let mut t = DenseMatrix::zeros(2, 2);
        t[(0, 0)] = Complex64::new(libm::cos(0.3), -libm::sin(0.3));
        t[(1, 1)] = Complex64::new(libm::cos(0.7), -libm::sin(0.7));
        let s = DenseMatrix::identity(2);
        let mut lam = solve_reduced(&t, &s).unwrap();
        lam.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
        assert!((lam[0] - t[(0, 0)]).norm() < 1e-12);
        assert!((lam[1] - t[(1, 1)]).norm() < 1e-12);
    }

    #[test]
    fn threshold_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let t = random_matrix(5, &mut rng);
            let g = random_matrix(5, &mut rng);
            let s = g.adjoint().matmul(&g);
            let mut prev = usize::MAX;
            for sigma in [1e-12, 1e-6, 1e-2, 0.1, 0.5] {
                let retained = match regularize(&t, &s, sigma) {
                    Ok((_, _, r)) => r.retained,
                    Err(RegularizeError::AllTruncated { .. }) => 0,
                    Err(e) => panic!("{e}"),
                };
                assert!(retained <= prev, "retained grew as sigma grew");
                prev = retained;
            }
        }
    }
}
