//! Independent numerical oracles for the integration tests.
//!
//! Everything here deliberately avoids the crate's own solver paths:
//! dense Pauli matrices come from literal Kronecker products, matrix
//! exponentials from scaling-and-squaring, Hermitian spectra from two-sided
//! Jacobi rotations, and general spectra from characteristic-polynomial
//! root finding. These are the reference implementations the library is
//! checked against.

#![allow(dead_code)]
// oracle code keeps textbook index form
#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;
use qbksp_core::linalg::DenseMatrix;
use qbksp_core::pauli::{Pauli, PauliHamiltonian};
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_2x2(p: Pauli) -> [[Complex64; 2]; 2] {
    let z = c(0.0, 0.0);
    match p {
        Pauli::I => [[c(1.0, 0.0), z], [z, c(1.0, 0.0)]],
        Pauli::X => [[z, c(1.0, 0.0)], [c(1.0, 0.0), z]],
        Pauli::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        Pauli::Z => [[c(1.0, 0.0), z], [z, c(-1.0, 0.0)]],
    }
}

pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ar in 0..a.rows() {
        for ac in 0..a.cols() {
            for br in 0..b.rows() {
                for bc in 0..b.cols() {
                    out[(ar * b.rows() + br, ac * b.cols() + bc)] = a[(ar, ac)] * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Dense matrix of a Pauli string by literal Kronecker products.
pub fn kron_string(ops: &[Pauli]) -> DenseMatrix {
    let mut out = DenseMatrix::identity(1);
    for &p in ops {
        let m2 = pauli_2x2(p);
        let mut dm = DenseMatrix::zeros(2, 2);
        for r in 0..2 {
            for cidx in 0..2 {
                dm[(r, cidx)] = m2[r][cidx];
            }
        }
        out = kron(&out, &dm);
    }
    out
}

/// Dense Hamiltonian built term by term with the Kronecker oracle.
pub fn kron_hamiltonian(ham: &PauliHamiltonian) -> DenseMatrix {
    let dim = 1usize << ham.n_qubits();
    let mut out = DenseMatrix::zeros(dim, dim);
    for (coeff, string) in ham.terms() {
        let m = kron_string(string.ops());
        for r in 0..dim {
            for cc in 0..dim {
                out[(r, cc)] += m[(r, cc)] * *coeff;
            }
        }
    }
    out
}

pub fn mat_scale(a: &DenseMatrix, s: Complex64) -> DenseMatrix {
    let mut out = a.clone();
    for r in 0..a.rows() {
        for cc in 0..a.cols() {
            out[(r, cc)] = a[(r, cc)] * s;
        }
    }
    out
}

pub fn mat_add(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut out = a.clone();
    for r in 0..a.rows() {
        for cc in 0..a.cols() {
            out[(r, cc)] = a[(r, cc)] + b[(r, cc)];
        }
    }
    out
}

pub fn mat_diff_norm(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let mut acc = 0.0;
    for r in 0..a.rows() {
        for cc in 0..a.cols() {
            acc += (a[(r, cc)] - b[(r, cc)]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Matrix exponential by scaling-and-squaring with a Taylor series.
pub fn expm(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let norm = a.frobenius_norm();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = mat_scale(a, c(1.0 / f64::powi(2.0, squarings as i32), 0.0));
    // Taylor to machine precision at ||A|| <= 0.5
    let mut result = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for k in 1..=30u32 {
        term = term.matmul(&scaled);
        term = mat_scale(&term, c(1.0 / k as f64, 0.0));
        result = mat_add(&result, &term);
        if term.frobenius_norm() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// Hermitian eigenvalues through the real symmetric embedding
/// [[Re A, -Im A], [Im A, Re A]] and classic real Jacobi rotations;
/// independent of the library's Householder + QL path. The embedding
/// doubles every eigenvalue, so every second sorted value is returned.
pub fn jacobi_eigvalsh(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let m = 2 * n;
    let mut w = vec![vec![0.0f64; m]; m];
    for r in 0..n {
        for cc in 0..n {
            let z = a[(r, cc)];
            w[r][cc] = z.re;
            w[r + n][cc + n] = z.re;
            w[r][cc + n] = -z.im;
            w[r + n][cc] = z.im;
        }
    }
    let scale: f64 = w
        .iter()
        .flat_map(|row| row.iter().map(|x| x * x))
        .sum::<f64>()
        .sqrt()
        .max(1.0);
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for r in 0..m {
            for cc in r + 1..m {
                off += w[r][cc] * w[r][cc];
            }
        }
        if off.sqrt() < 1e-15 * scale {
            break;
        }
        for p in 0..m - 1 {
            for q in p + 1..m {
                let apq = w[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * f64::atan2(2.0 * apq, w[p][p] - w[q][q]);
                let (s, ccos) = theta.sin_cos();
                // rows p, q
                for k in 0..m {
                    let wpk = w[p][k];
                    let wqk = w[q][k];
                    w[p][k] = ccos * wpk + s * wqk;
                    w[q][k] = -s * wpk + ccos * wqk;
                }
                // columns p, q
                for k in 0..m {
                    let wkp = w[k][p];
                    let wkq = w[k][q];
                    w[k][p] = ccos * wkp + s * wkq;
                    w[k][q] = -s * wkp + ccos * wkq;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..m).map(|i| w[i][i]).collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vals.into_iter().step_by(2).collect()
}

/// Characteristic polynomial coefficients by the Faddeev-LeVerrier
/// recurrence: p(λ) = λ^n + c[n-1] λ^{n-1} + ... + c[0].
pub fn char_poly(a: &DenseMatrix) -> Vec<Complex64> {
    let n = a.rows();
    let mut coeffs = vec![c(0.0, 0.0); n];
    let mut m = DenseMatrix::zeros(n, n);
    for k in 1..=n {
        m = if k == 1 {
            a.clone()
        } else {
            let mut shifted = m.clone();
            let ck = coeffs[n - k + 1];
            for i in 0..n {
                shifted[(i, i)] += ck;
            }
            a.matmul(&shifted)
        };
        let trace: Complex64 = (0..n).map(|i| m[(i, i)]).sum();
        coeffs[n - k] = -trace / c(k as f64, 0.0);
    }
    coeffs
}

/// All polynomial roots by Durand-Kerner iteration.
pub fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = c(1.0, 0.0);
        for k in (0..n).rev() {
            acc = acc * z + coeffs[k];
        }
        acc
    };
    // start on a non-symmetric spiral
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| c(0.4, 0.9).powu(k as u32 + 1))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut denom = c(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-300 {
                continue;
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            moved = moved.max(delta.norm());
        }
        if moved < 1e-14 {
            break;
        }
    }
    roots
}

/// Solve A X = B by LU with partial pivoting.
pub fn lu_solve(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.rows(), n);
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (pivot, _) = (k..n)
            .map(|r| (r, lu[(r, k)].norm()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pivot != k {
            for cc in 0..n {
                let tmp = lu[(k, cc)];
                lu[(k, cc)] = lu[(pivot, cc)];
                lu[(pivot, cc)] = tmp;
            }
            perm.swap(k, pivot);
        }
        let d = lu[(k, k)];
        assert!(d.norm() > 1e-300, "singular matrix in lu_solve");
        for r in k + 1..n {
            let f = lu[(r, k)] / d;
            lu[(r, k)] = f;
            for cc in k + 1..n {
                let upd = f * lu[(k, cc)];
                lu[(r, cc)] -= upd;
            }
        }
    }
    let mut x = DenseMatrix::zeros(n, b.cols());
    for col in 0..b.cols() {
        // forward substitution on permuted rhs
        let mut y = vec![c(0.0, 0.0); n];
        for r in 0..n {
            let mut acc = b[(perm[r], col)];
            for k in 0..r {
                acc -= lu[(r, k)] * y[k];
            }
            y[r] = acc;
        }
        // back substitution
        for r in (0..n).rev() {
            let mut acc = y[r];
            for k in r + 1..n {
                acc -= lu[(r, k)] * x[(k, col)];
            }
            x[(r, col)] = acc / lu[(r, r)];
        }
    }
    x
}

/// Greedy nearest-neighbor matching distance between two complex sets.
pub fn max_match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for &x in a {
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        for (j, &y) in b.iter().enumerate() {
            if !used[j] {
                let d = (x - y).norm();
                if d < best {
                    best = d;
                    best_j = j;
                }
            }
        }
        used[best_j] = true;
        worst = worst.max(best);
    }
    worst
}

pub fn random_dense(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    for r in 0..n {
        for cc in 0..n {
            m[(r, cc)] = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
    }
    m
}

pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    for r in 0..n {
        for cc in 0..=r {
            let z = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            if r == cc {
                m[(r, cc)] = c(z.re, 0.0);
            } else {
                m[(r, cc)] = z;
                m[(cc, r)] = z.conj();
            }
        }
    }
    m
}
