//! Singular value decomposition by one-sided Jacobi rotations.
//!
//! Column pairs of the working matrix are rotated until mutually orthogonal;
//! the rotations accumulate into V, the column norms become the singular
//! values and the normalized columns form U. One-sided Jacobi keeps small
//! singular values to high relative accuracy, which matters because the
//! regularization threshold is compared directly against them.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{DenseMatrix, LinalgError};

const MAX_SWEEPS: usize = 60;

/// Result of [`svd`]: `a = u · diag(sigma) · vh` with `sigma` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub vh: DenseMatrix,
}

/// Full SVD of a rectangular complex matrix.
pub fn svd(a: &DenseMatrix) -> Result<Svd, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    // one-sided Jacobi wants rows >= cols; factorize the adjoint otherwise
    if a.rows() < a.cols() {
        let f = svd(&a.adjoint())?;
        return Ok(Svd {
            u: f.vh.adjoint(),
            sigma: f.sigma,
            vh: f.u.adjoint(),
        });
    }

    let m = a.rows();
    let n = a.cols();
    let mut w = a.clone();
    let mut v = DenseMatrix::identity(n);
    let eps = f64::EPSILON;

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = Complex64::new(0.0, 0.0);
                for r in 0..m {
                    let wp = w[(r, p)];
                    let wq = w[(r, q)];
                    app += wp.norm_sqr();
                    aqq += wq.norm_sqr();
                    apq += wp.conj() * wq;
                }
                let off = apq.norm();
                if off <= eps * libm::sqrt(app * aqq) || off == 0.0 {
                    continue;
                }
                rotated = true;
                // unitary 2x2 zeroing the off-diagonal of [[app, apq], [apq*, aqq]]
                let phase = apq / off;
                let zeta = (aqq - app) / (2.0 * off);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                let sp = phase * s;
                for r in 0..m {
                    let wp = w[(r, p)];
                    let wq = w[(r, q)];
                    w[(r, p)] = wp * c - wq * sp.conj();
                    w[(r, q)] = wp * sp + wq * c;
                }
                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = vp * c - vq * sp.conj();
                    v[(r, q)] = vp * sp + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma = vec![0.0f64; n];
    let mut u = DenseMatrix::zeros(m, n);
    let mut deficient: Vec<usize> = Vec::new();
    for c in 0..n {
        let norm: f64 = libm::sqrt((0..m).map(|r| w[(r, c)].norm_sqr()).sum());
        sigma[c] = norm;
        if norm > 1e-300 {
            for r in 0..m {
                u[(r, c)] = w[(r, c)] / norm;
            }
        } else {
            sigma[c] = 0.0;
            deficient.push(c);
        }
    }
    fill_deficient_columns(&mut u, &deficient);

    // descending order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).expect("finite"));
    let sigma_sorted: Vec<f64> = order.iter().map(|&i| sigma[i]).collect();
    let mut u_sorted = DenseMatrix::zeros(m, n);
    let mut v_sorted = DenseMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..m {
            u_sorted[(r, new)] = u[(r, old)];
        }
        for r in 0..n {
            v_sorted[(r, new)] = v[(r, old)];
        }
    }

    Ok(Svd {
        u: u_sorted,
        sigma: sigma_sorted,
        vh: v_sorted.adjoint(),
    })
}

/// Replace zero columns of U by unit vectors orthonormalized against the
/// existing columns, so U keeps orthonormal columns even for rank-deficient
/// input.
fn fill_deficient_columns(u: &mut DenseMatrix, deficient: &[usize]) {
    let m = u.rows();
    let n = u.cols();
    let mut next_basis = 0usize;
    for &c in deficient {
        'candidates: while next_basis < m {
            let mut col = vec![Complex64::new(0.0, 0.0); m];
            col[next_basis] = Complex64::new(1.0, 0.0);
            next_basis += 1;
            // two Gram-Schmidt passes against every other column
            for _ in 0..2 {
                for other in 0..n {
                    if other == c {
                        continue;
                    }
                    let mut dot = Complex64::new(0.0, 0.0);
                    for r in 0..m {
                        dot += u[(r, other)].conj() * col[r];
                    }
                    for r in 0..m {
                        let upd = dot * u[(r, other)];
                        col[r] -= upd;
                    }
                }
            }
            let norm: f64 = libm::sqrt(col.iter().map(|z| z.norm_sqr()).sum());
            if norm > 1e-6 {
                for r in 0..m {
                    u[(r, c)] = col[r] / norm;
                }
                break 'candidates;
            }
        }
    }
}
