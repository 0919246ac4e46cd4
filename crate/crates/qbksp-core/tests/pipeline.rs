//! End-to-end pipeline checks against brute-force constructions.

mod common;

use num_complex::Complex64;
use qbksp_core::expectation::MeasurementModel;
use qbksp_core::krylov::{
    assemble, evaluate_block, run_qbksp, run_qbksp_prepared, ElementCache, MeasurementBackend,
    NormalizationMode, QbkspConfig,
};
use qbksp_core::pauli::PauliHamiltonian;
use qbksp_core::reference::{build_block, random_with_overlap};
use qbksp_core::statevector::{ExactPropagator, Statevector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(n_qubits: usize, rng: &mut ChaCha8Rng, real: bool) -> Statevector {
    let dim = 1usize << n_qubits;
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| {
            Complex64::new(
                rng.random::<f64>() - 0.5,
                if real { 0.0 } else { rng.random::<f64>() - 0.5 },
            )
        })
        .collect();
    Statevector::from_amplitudes_normalized(amps).unwrap().0
}

/// Build S and T by explicitly constructing every Krylov vector and taking
/// pairwise overlaps; the assembled block-Toeplitz matrices must agree.
fn brute_force_check(n: usize, b: usize, k_max: usize, real_refs: bool, seed: u64) {
    let ham = PauliHamiltonian::heisenberg_chain(n, [1.0, 1.0, 1.0]).unwrap();
    let (hn, rec) = ham.normalized().unwrap();
    let prop = ExactPropagator::new(&hn, rec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let refs: Vec<Statevector> = (0..b).map(|_| random_state(n, &mut rng, real_refs)).collect();
    let tau = 0.9;

    let backend =
        MeasurementBackend::new(MeasurementModel::Exact, &hn, Some(&prop), &refs, tau).unwrap();
    let mut cache = ElementCache::new(b, tau);
    for step in 0..=k_max + 1 {
        cache.push(evaluate_block(&backend, b, step, real_refs, false).unwrap());
    }
    let matrices = assemble(&cache, k_max).unwrap();

    // Krylov vectors ψ^b_k = U(kτ) ψ_b by repeated evolution
    let mut vectors: Vec<Vec<Statevector>> = Vec::new();
    for r in refs.iter() {
        let mut per_ref = vec![r.clone()];
        for _ in 1..=k_max {
            let prev = per_ref.last().unwrap();
            per_ref.push(prop.evolve(tau, prev).unwrap());
        }
        vectors.push(per_ref);
    }
    let dim = b * (k_max + 1);
    let mut worst_s = 0.0f64;
    let mut worst_t = 0.0f64;
    for l in 0..=k_max {
        for bi in 0..b {
            for k in 0..=k_max {
                for bj in 0..b {
                    let row = l * b + bi;
                    let col = k * b + bj;
                    let s_brute = vectors[bi][l].inner(&vectors[bj][k]).unwrap();
                    let evolved = prop.evolve(tau, &vectors[bj][k]).unwrap();
                    let t_brute = vectors[bi][l].inner(&evolved).unwrap();
                    worst_s = worst_s.max((matrices.s[(row, col)] - s_brute).norm());
                    worst_t = worst_t.max((matrices.t[(row, col)] - t_brute).norm());
                }
            }
        }
    }
    assert!(dim == matrices.s.rows());
    assert!(
        worst_s < 1e-10,
        "S deviates from brute force by {worst_s:.2e} (n={n}, B={b}, real={real_refs})"
    );
    assert!(
        worst_t < 1e-10,
        "T deviates from brute force by {worst_t:.2e} (n={n}, B={b}, real={real_refs})"
    );
}

#[test]
fn assembled_matrices_match_brute_force_complex_refs() {
    brute_force_check(3, 2, 4, false, 101);
    brute_force_check(2, 3, 3, false, 102);
}

#[test]
fn assembled_matrices_match_brute_force_real_refs() {
    brute_force_check(3, 2, 4, true, 103);
    brute_force_check(4, 2, 5, true, 104);
}

#[test]
fn exact_references_converge_immediately() {
    // γ = 1 references are exact eigenstates; every energy is exact at k = 0
    let ham = PauliHamiltonian::heisenberg_chain(4, [1.0, 1.0, 1.0]).unwrap();
    let (hn, rec) = ham.normalized().unwrap();
    let prop = ExactPropagator::new(&hn, rec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let block = build_block(&[1.0, 1.0], &prop, true, &mut rng).unwrap();
    let cfg = QbkspConfig {
        references: block.states,
        tau: 2.0,
        k_max: 0,
        model: MeasurementModel::Exact,
        sigma: 1e-10,
        per_state_tolerance: 1e-4,
        degeneracy_cluster_tol: 1.6e-3,
        n_target: 8,
        orthogonal_references: false,
        normalization: NormalizationMode::CoefficientNorm,
    };
    let run = run_qbksp_prepared(&hn, rec, Some(&prop), &cfg).unwrap();
    let est = &run.estimates[0];
    let oracle = prop.physical_eigenvalues();
    assert_eq!(est.levels.len(), 2);
    for (level, want) in est.levels.iter().zip(&oracle) {
        assert!(
            (level.energy - want).abs() / rec.scale < 1e-10,
            "energy {} vs oracle {want}",
            level.energy
        );
    }
}

#[test]
fn run_qbksp_wrapper_matches_prepared_run() {
    let ham = PauliHamiltonian::heisenberg_chain(3, [1.0, 1.0, 1.0]).unwrap();
    let (hn, rec) = ham.normalized().unwrap();
    let prop = ExactPropagator::new(&hn, rec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let target = prop.eigenstate(0).unwrap();
    let reference = random_with_overlap(&target, 0.5, true, &mut rng).unwrap();
    let cfg = QbkspConfig {
        references: vec![reference],
        tau: 1.5,
        k_max: 10,
        model: MeasurementModel::Exact,
        sigma: 1e-10,
        per_state_tolerance: 1e-4,
        degeneracy_cluster_tol: 1.6e-3,
        n_target: 100,
        orthogonal_references: false,
        normalization: NormalizationMode::CoefficientNorm,
    };
    let via_wrapper = run_qbksp(&ham, &cfg).unwrap();
    let via_prepared = run_qbksp_prepared(&hn, rec, Some(&prop), &cfg).unwrap();
    assert_eq!(via_wrapper.estimates.len(), via_prepared.estimates.len());
    for (a, b) in via_wrapper.estimates.iter().zip(&via_prepared.estimates) {
        assert_eq!(a.levels.len(), b.levels.len());
        for (x, y) in a.levels.iter().zip(&b.levels) {
            assert!((x.energy - y.energy).abs() < 1e-12);
        }
    }
}

#[test]
fn spectral_normalization_spreads_phases() {
    let ham = PauliHamiltonian::heisenberg_chain(4, [1.0, 1.0, 1.0]).unwrap();
    let dense_vals = common::jacobi_eigvalsh(&ham.to_dense());
    let (hn, rec) = ham
        .normalized_to_bounds(dense_vals[0], *dense_vals.last().unwrap())
        .unwrap();
    let prop = ExactPropagator::new(&hn, rec).unwrap();
    let vals = prop.eigenvalues();
    assert!((vals[0] + 1.0).abs() < 1e-9);
    assert!((vals.last().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn coarse_truncation_keeps_the_ground_state() {
    // a threshold of 0.1 mimics heavy sampling noise: accuracy degrades but
    // the extreme phases survive
    let ham = PauliHamiltonian::heisenberg_chain(6, [1.0, 1.0, 1.0]).unwrap();
    let (hn, rec) = ham.normalized().unwrap();
    let prop = ExactPropagator::new(&hn, rec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let block = build_block(&[0.5, 0.5], &prop, true, &mut rng).unwrap();
    let mut cfg = QbkspConfig {
        references: block.states,
        tau: 3.0,
        k_max: 30,
        model: MeasurementModel::Exact,
        sigma: 0.1,
        per_state_tolerance: 1e-4,
        degeneracy_cluster_tol: 1.6e-3,
        n_target: 1000,
        orthogonal_references: false,
        normalization: NormalizationMode::CoefficientNorm,
    };
    let run = run_qbksp_prepared(&hn, rec, Some(&prop), &cfg).unwrap();
    let e0 = prop.physical_eigenvalues()[0];
    let last = run.estimates.last().unwrap();
    let best = last
        .levels
        .iter()
        .map(|l| (l.energy - e0).abs())
        .fold(f64::INFINITY, f64::min);
    assert!(
        best < 0.5,
        "ground state lost under coarse truncation: nearest {best:.3}"
    );
    // the same run at sigma = 1e-10 resolves it far more precisely
    cfg.sigma = 1e-10;
    let fine = run_qbksp_prepared(&hn, rec, Some(&prop), &cfg).unwrap();
    let best_fine = fine
        .estimates
        .last()
        .unwrap()
        .levels
        .iter()
        .map(|l| (l.energy - e0).abs())
        .fold(f64::INFINITY, f64::min);
    assert!(best_fine < 1e-6);
    assert!(best_fine < best);
}
