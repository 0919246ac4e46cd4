//! Eigenvalues of general complex matrices.
//!
//! Householder reduction to upper Hessenberg form, then an explicitly
//! shifted QR iteration with Wilkinson shifts and occasional exceptional
//! shifts. Only eigenvalues are produced; the pipeline never needs the
//! Schur vectors.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{DenseMatrix, LinalgError};

const MAX_ITER_PER_EIGENVALUE: usize = 60;

/// All eigenvalues of a square complex matrix, in no particular order.
pub fn eig_general(a: &DenseMatrix) -> Result<Vec<Complex64>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare);
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    qr_eigenvalues(&mut h)
}

/// In-place reduction to upper Hessenberg form by Householder reflectors.
fn hessenberg(a: &mut DenseMatrix) {
    let n = a.rows();
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut x = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            x[i] = a[(k + 1 + i, k)];
        }
        let nx = libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum());
        if nx == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * nx;
        let mut v = x;
        v[0] -= alpha;
        let nv = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        if nv < 1e-300 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= nv;
        }
        // rows k+1.. : A <- (I - 2vv†) A
        for col in k..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..m {
                dot += v[i].conj() * a[(k + 1 + i, col)];
            }
            let dot2 = 2.0 * dot;
            for i in 0..m {
                let upd = dot2 * v[i];
                a[(k + 1 + i, col)] -= upd;
            }
        }
        // cols k+1.. : A <- A (I - 2vv†)
        for row in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..m {
                dot += a[(row, k + 1 + i)] * v[i];
            }
            let dot2 = 2.0 * dot;
            for i in 0..m {
                let upd = dot2 * v[i].conj();
                a[(row, k + 1 + i)] -= upd;
            }
        }
    }
}

fn trailing_eigenvalues(h: &DenseMatrix, i: usize, j: usize) -> (Complex64, Complex64) {
    let a = h[(i, i)];
    let b = h[(i, j)];
    let c = h[(j, i)];
    let d = h[(j, j)];
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    ((tr + disc) / 2.0, (tr - disc) / 2.0)
}

/// Shifted QR on an upper Hessenberg matrix, deflating from the bottom.
fn qr_eigenvalues(h: &mut DenseMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let n = h.rows();
    let eps = f64::EPSILON;
    let mut lambdas = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut total_iter = 0usize;
    'outer: loop {
        let mut iters = 0usize;
        loop {
            // deflation scan
            let mut lo = hi;
            while lo > 0 {
                let sub = h[(lo, lo - 1)].norm();
                if sub <= eps * (h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm()) {
                    h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                    break;
                }
                lo -= 1;
            }
            if lo == hi {
                lambdas.push(h[(hi, hi)]);
                if hi == 0 {
                    break 'outer;
                }
                hi -= 1;
                break;
            }
            if lo == hi - 1 {
                let (r1, r2) = trailing_eigenvalues(h, lo, hi);
                lambdas.push(r1);
                lambdas.push(r2);
                if lo == 0 {
                    break 'outer;
                }
                hi = lo - 1;
                break;
            }
            iters += 1;
            total_iter += 1;
            if iters > MAX_ITER_PER_EIGENVALUE {
                return Err(LinalgError::NoConvergence {
                    iterations: total_iter,
                });
            }
            // Wilkinson shift: trailing 2x2 eigenvalue closest to h[hi,hi]
            let (r1, r2) = trailing_eigenvalues(h, hi - 1, hi);
            let hd = h[(hi, hi)];
            let mut mu = if (r1 - hd).norm() < (r2 - hd).norm() { r1 } else { r2 };
            if iters.is_multiple_of(12) {
                // exceptional shift to break rare cycles
                mu = hd + Complex64::new(h[(hi, hi - 1)].norm(), 0.0);
            }
            qr_step(h, lo, hi, mu);
        }
    }
    Ok(lambdas)
}

/// One explicit shifted QR step on the active block [lo, hi].
fn qr_step(h: &mut DenseMatrix, lo: usize, hi: usize, mu: Complex64) {
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    // QR by Givens rotations G_i acting on rows (i, i+1)
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let a = h[(i, i)];
        let b = h[(i + 1, i)];
        let norm = libm::hypot(a.norm(), b.norm());
        if norm == 0.0 {
            rots.push((1.0, Complex64::new(0.0, 0.0)));
            continue;
        }
        let phase = if a.norm() > 0.0 {
            a / a.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let c = a.norm() / norm;
        let s = phase * b.conj() / norm;
        rots.push((c, s));
        for col in i..=hi {
            let r1 = h[(i, col)];
            let r2 = h[(i + 1, col)];
            h[(i, col)] = c * r1 + s * r2;
            h[(i + 1, col)] = -s.conj() * r1 + c * r2;
        }
    }
    // RQ: multiply by G_i† on columns (i, i+1)
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let i = lo + idx;
        let top = (i + 2).min(hi);
        for row in lo..=top {
            let c1 = h[(row, i)];
            let c2 = h[(row, i + 1)];
            h[(row, i)] = c1 * c + c2 * s.conj();
            h[(row, i + 1)] = -c1 * s + c2 * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}
