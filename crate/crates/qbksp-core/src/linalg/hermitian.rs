//! Hermitian eigendecomposition.
//!
//! Householder similarity transforms reduce the matrix to a real symmetric
//! tridiagonal form (off-diagonal phases are absorbed into the basis), which
//! an implicit-shift QL iteration then diagonalizes. Exactly real input
//! stays real through the whole reduction, so eigenvectors of real symmetric
//! matrices come out with zero imaginary parts.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{DenseMatrix, LinalgError};

const HERMITIAN_TOL: f64 = 1e-12;
const MAX_QL_SWEEPS: usize = 60;

/// Eigenvalues (ascending) and orthonormal eigenvectors (as matrix columns)
/// of a Hermitian matrix.
pub fn eigh(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare);
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let scale = a.max_abs().max(1.0);
    if a.hermitian_deviation() > HERMITIAN_TOL * scale {
        return Err(LinalgError::NotHermitian);
    }
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), DenseMatrix::zeros(0, 0)));
    }
    if n == 1 {
        return Ok((vec![a[(0, 0)].re], DenseMatrix::identity(1)));
    }

    let mut work = a.clone();
    let mut q = DenseMatrix::identity(n);
    let reflectors = tridiagonalize(&mut work);
    accumulate(&mut q, &reflectors);

    let mut diag: Vec<f64> = (0..n).map(|i| work[(i, i)].re).collect();
    let mut off: Vec<f64> = vec![0.0; n];
    absorb_phases(&work, &mut off, &mut q);

    ql_implicit(&mut diag, &mut off, &mut q)?;
    sort_ascending(&mut diag, &mut q);
    Ok((diag, q))
}

struct Reflector {
    start: usize,
    v: Vec<Complex64>,
}

/// In-place Householder reduction to Hermitian tridiagonal form.
fn tridiagonalize(a: &mut DenseMatrix) -> Vec<Reflector> {
    let n = a.rows();
    let mut reflectors = Vec::new();
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

        // A_sub <- A_sub - v w† - w v†  with u = A_sub v, w = 2u - 2(v†u)v
        let mut u = vec![Complex64::new(0.0, 0.0); m];
        for r in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..m {
                acc += a[(k + 1 + r, k + 1 + c)] * v[c];
            }
            u[r] = acc;
        }
        let vu: Complex64 = v.iter().zip(&u).map(|(vi, ui)| vi.conj() * ui).sum();
        let w: Vec<Complex64> = u.iter().zip(&v).map(|(ui, vi)| 2.0 * ui - 2.0 * vu * vi).collect();
        for r in 0..m {
            for c in 0..m {
                let delta = v[r] * w[c].conj() + w[r] * v[c].conj();
                a[(k + 1 + r, k + 1 + c)] -= delta;
            }
        }

        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in 2..=m {
            a[(k + i, k)] = Complex64::new(0.0, 0.0);
            a[(k, k + i)] = Complex64::new(0.0, 0.0);
        }
        reflectors.push(Reflector { start: k + 1, v });
    }
    reflectors
}

/// Q = H_0 H_1 ... applied to the identity, reflectors in reverse order.
fn accumulate(q: &mut DenseMatrix, reflectors: &[Reflector]) {
    let n = q.rows();
    for refl in reflectors.iter().rev() {
        let s = refl.start;
        let m = refl.v.len();
        // Q_sub <- Q_sub - 2 v (v† Q_sub)
        for col in s..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..m {
                dot += refl.v[i].conj() * q[(s + i, col)];
            }
            let dot2 = 2.0 * dot;
            for i in 0..m {
                let upd = dot2 * refl.v[i];
                q[(s + i, col)] -= upd;
            }
        }
    }
}

/// Rotate basis columns so the tridiagonal off-diagonals become real ≥ 0.
fn absorb_phases(work: &DenseMatrix, off: &mut [f64], q: &mut DenseMatrix) {
    let n = work.rows();
    let mut d = vec![Complex64::new(1.0, 0.0); n];
    for i in 0..n - 1 {
        let w = work[(i + 1, i)] * d[i];
        let a = w.norm();
        d[i + 1] = if a > 0.0 { w / a } else { d[i] };
        off[i] = a;
    }
    for c in 0..n {
        if d[c] != Complex64::new(1.0, 0.0) {
            for r in 0..n {
                q[(r, c)] *= d[c];
            }
        }
    }
}

/// Implicit-shift QL on a real symmetric tridiagonal, accumulating the
/// (real) rotations into the complex eigenvector matrix.
fn ql_implicit(
    d: &mut [f64],
    e: &mut [f64],
    q: &mut DenseMatrix,
) -> Result<(), LinalgError> {
    let n = d.len();
    let nq = q.rows();
    let eps = f64::EPSILON;
    let mut total_iter = 0usize;
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total_iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(LinalgError::NoConvergence {
                    iterations: total_iter,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            let sg = if g >= 0.0 { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sg);
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut broke = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    broke = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in 0..nq {
                    f = q[(row, i + 1)].re;
                    let fi = q[(row, i + 1)].im;
                    let qi = q[(row, i)];
                    q[(row, i + 1)] = Complex64::new(s * qi.re + c * f, s * qi.im + c * fi);
                    q[(row, i)] = Complex64::new(c * qi.re - s * f, c * qi.im - s * fi);
                }
            }
            if !broke {
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
    }
    Ok(())
}

fn sort_ascending(d: &mut [f64], q: &mut DenseMatrix) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("eigenvalues are finite"));
    let d_old: Vec<f64> = d.to_vec();
    let q_old = q.clone();
    for (new, &old) in order.iter().enumerate() {
        d[new] = d_old[old];
        for r in 0..q.rows() {
            q[(r, new)] = q_old[(r, old)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &DenseMatrix, vals: &[f64], vecs: &DenseMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, val) in vals.iter().enumerate() {
            let v = vecs.column(k);
            let av = a.matvec(&v);
            let r: f64 = av
                .iter()
                .zip(&v)
                .map(|(a_i, v_i)| (a_i - val * v_i).norm_sqr())
                .sum();
            worst = worst.max(libm::sqrt(r));
        }
        worst
    }

    #[test]
    fn identity_and_diagonal() {
        let (vals, _) = eigh(&DenseMatrix::identity(4)).unwrap();
        for v in vals {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let mut d = DenseMatrix::zeros(2, 2);
        d[(0, 0)] = Complex64::new(-1.0, 0.0);
        d[(1, 1)] = Complex64::new(2.0, 0.0);
        let (vals, _) = eigh(&d).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn random_hermitian_residual_and_orthonormality() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 3, 5, 8, 17, 32] {
            let mut a = DenseMatrix::zeros(n, n);
            for r in 0..n {
                for c in 0..=r {
                    let z = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    if r == c {
                        a[(r, c)] = Complex64::new(z.re, 0.0);
                    } else {
                        a[(r, c)] = z;
                        a[(c, r)] = z.conj();
                    }
                }
            }
            let norm = a.frobenius_norm();
            let (vals, vecs) = eigh(&a).unwrap();
            assert!(residual(&a, &vals, &vecs) <= 1e-10 * norm);
            let gram = vecs.adjoint().matmul(&vecs);
            let mut dev: f64 = 0.0;
            for r in 0..n {
                for c in 0..n {
                    let want = if r == c { 1.0 } else { 0.0 };
                    dev = dev.max((gram[(r, c)] - want).norm());
                }
            }
            assert!(dev < 1e-10, "orthonormality {dev} at n={n}");
            // eigenvalue sum equals the trace
            let trace: f64 = (0..n).map(|i| a[(i, i)].re).sum();
            let sum: f64 = vals.iter().sum();
            assert!((trace - sum).abs() <= 1e-10 * norm.max(1.0));
        }
    }

    #[test]
    fn real_input_gives_real_eigenvectors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 12;
        let mut a = DenseMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..=r {
                let x = rng.random::<f64>() - 0.5;
                a[(r, c)] = Complex64::new(x, 0.0);
                a[(c, r)] = Complex64::new(x, 0.0);
            }
        }
        let (_, vecs) = eigh(&a).unwrap();
        let max_imag = vecs.data().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert_eq!(max_imag, 0.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = DenseMatrix::zeros(2, 2);
        a[(0, 1)] = Complex64::new(1.0, 0.0);
        assert_eq!(eigh(&a).unwrap_err(), LinalgError::NotHermitian);
    }
}
