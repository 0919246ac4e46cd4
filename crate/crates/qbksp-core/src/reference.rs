//! Construction of initial reference blocks.
//!
//! Model-system experiments seed the Krylov block with random states of
//! prescribed overlap against oracle eigenstates: state b overlaps the b-th
//! lowest eigenstate with weight γ, the rest is a Haar-random unit vector
//! from the orthogonal complement. File-loaded references (molecular
//! experiments) arrive through the statevector text format instead.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::statevector::{ExactPropagator, StateError, Statevector};

/// Where a reference state came from.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceProvenance {
    RandomOverlap { gamma: f64, target_level: usize },
    File { label: String },
}

/// The initial block seeding the Krylov subspace.
#[derive(Debug, Clone)]
pub struct ReferenceBlock {
    pub states: Vec<Statevector>,
    pub provenance: Vec<ReferenceProvenance>,
}

impl ReferenceBlock {
    pub fn from_states(states: Vec<Statevector>, provenance: Vec<ReferenceProvenance>) -> Self {
        Self { states, provenance }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// True when every amplitude of every state is exactly real.
    pub fn is_real(&self) -> bool {
        self.states.iter().all(|s| s.is_real())
    }
}

/// γ|target⟩ + sqrt(1-γ²)|r⟩ with |r⟩ Haar-random in the orthogonal
/// complement of the target. The overlap ⟨target|result⟩ equals γ exactly.
/// With `real_mode` the complement vector is sampled real, which keeps the
/// result real for real targets.
pub fn random_with_overlap(
    target: &Statevector,
    gamma: f64,
    real_mode: bool,
    rng: &mut impl Rng,
) -> Result<Statevector, ReferenceError> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(ReferenceError::BadOverlap(gamma));
    }
    if gamma == 1.0 {
        return Ok(target.clone());
    }
    let dim = target.dim();
    let mut r: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if real_mode { 0.0 } else { rng.sample(StandardNormal) };
            Complex64::new(re, im)
        })
        .collect();
    // project out the target and normalize
    let overlap = crate::statevector::inner_raw(target.amplitudes(), &r);
    for (x, t) in r.iter_mut().zip(target.amplitudes()) {
        *x -= overlap * t;
    }
    let norm = libm::sqrt(r.iter().map(|z| z.norm_sqr()).sum());
    if norm < 1e-12 {
        return Err(ReferenceError::DegenerateComplement);
    }
    let w = libm::sqrt(1.0 - gamma * gamma);
    let amps: Vec<Complex64> = r
        .iter()
        .zip(target.amplitudes())
        .map(|(ri, ti)| gamma * ti + w * (ri / norm))
        .collect();
    Statevector::from_amplitudes(amps).map_err(ReferenceError::State)
}

/// Build a block whose b-th state overlaps the b-th lowest oracle
/// eigenstate with the requested γ. Degenerate levels use whichever basis
/// the oracle eigendecomposition produced.
pub fn build_block(
    gammas: &[f64],
    oracle: &ExactPropagator,
    real_mode: bool,
    rng: &mut impl Rng,
) -> Result<ReferenceBlock, ReferenceError> {
    let available = oracle.eigenvalues().len();
    if gammas.len() > available {
        return Err(ReferenceError::TooManyReferences {
            requested: gammas.len(),
            available,
        });
    }
    let mut states = Vec::with_capacity(gammas.len());
    let mut provenance = Vec::with_capacity(gammas.len());
    for (level, &gamma) in gammas.iter().enumerate() {
        let target = oracle.eigenstate(level).map_err(ReferenceError::State)?;
        states.push(random_with_overlap(&target, gamma, real_mode, rng)?);
        provenance.push(ReferenceProvenance::RandomOverlap {
            gamma,
            target_level: level,
        });
    }
    Ok(ReferenceBlock { states, provenance })
}

/// Errors from reference construction.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceError {
    BadOverlap(f64),
    DegenerateComplement,
    TooManyReferences { requested: usize, available: usize },
    State(StateError),
}

impl fmt::Display for ReferenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceError::BadOverlap(g) => {
                write!(f, "overlap must lie in (0, 1], got {g}")
            }
            ReferenceError::DegenerateComplement => {
                write!(f, "random complement vanished after projection")
            }
            ReferenceError::TooManyReferences { requested, available } => {
                write!(f, "{requested} references requested but only {available} oracle states")
            }
            ReferenceError::State(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ReferenceError {}

impl From<StateError> for ReferenceError {
    fn from(e: StateError) -> Self {
        ReferenceError::State(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliHamiltonian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn oracle(n: usize) -> ExactPropagator {
        let (h, rec) = PauliHamiltonian::heisenberg_chain(n, [1.0, 1.0, 1.0])
            .unwrap()
            .normalized()
            .unwrap();
        ExactPropagator::new(&h, rec).unwrap()
    }

    fn random_state(n_qubits: usize, seed: u64) -> Statevector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 1usize << n_qubits;
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| {
                Complex64::new(
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                )
            })
            .collect();
        Statevector::from_amplitudes_normalized(amps).unwrap().0
    }

    #[test]
    fn gamma_one_returns_target() {
        let t = random_state(3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_with_overlap(&t, 1.0, false, &mut rng).unwrap();
        assert_eq!(s.amplitudes(), t.amplitudes());
    }

    #[test]
    fn overlap_is_exact() {
        let t = random_state(4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for gamma in [0.1, 0.5, 0.9] {
            let s = random_with_overlap(&t, gamma, false, &mut rng).unwrap();
            let ov = t.inner(&s).unwrap();
            assert!((ov.norm() - gamma).abs() < 1e-12);
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_orthogonal_over_many_draws() {
        let t = random_state(3, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let s = random_with_overlap(&t, 0.5, false, &mut rng).unwrap();
            // subtracting the γ|target⟩ part leaves a vector orthogonal to it
            let resid: Vec<Complex64> = s
                .amplitudes()
                .iter()
                .zip(t.amplitudes())
                .map(|(a, b)| a - 0.5 * b)
                .collect();
            let dot = crate::statevector::inner_raw(t.amplitudes(), &resid);
            assert!(dot.norm() < 1e-12);
        }
    }

    #[test]
    fn invalid_gamma_rejected() {
        let t = random_state(2, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        assert!(random_with_overlap(&t, 0.0, false, &mut rng).is_err());
        assert!(random_with_overlap(&t, 1.5, false, &mut rng).is_err());
    }

    #[test]
    fn block_targets_lowest_levels() {
        let orc = oracle(3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let block = build_block(&[0.5, 0.5, 0.5], &orc, true, &mut rng).unwrap();
        assert_eq!(block.len(), 3);
        for (b, state) in block.states.iter().enumerate() {
            let target = orc.eigenstate(b).unwrap();
            let ov = target.inner(state).unwrap();
            assert!((ov.norm() - 0.5).abs() < 1e-12);
            // unit diagonal of the Gram matrix
            assert!((state.inner(state).unwrap().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn real_mode_gives_real_states() {
        let orc = oracle(4);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let block = build_block(&[0.5, 0.5], &orc, true, &mut rng).unwrap();
        assert!(block.is_real());
    }

    #[test]
    fn block_is_seed_reproducible() {
        let orc = oracle(3);
        let a = build_block(&[0.5], &orc, true, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = build_block(&[0.5], &orc, true, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a.states[0].amplitudes(), b.states[0].amplitudes());
    }

    #[test]
    fn too_many_references() {
        let orc = oracle(2);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let gammas = [0.5; 5];
        match build_block(&gammas, &orc, true, &mut rng) {
            Err(ReferenceError::TooManyReferences { requested: 5, available: 4 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exact_references_build_block_gamma_one() {
        let orc = oracle(2);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let block = build_block(&[1.0, 1.0], &orc, true, &mut rng).unwrap();
        for (b, s) in block.states.iter().enumerate() {
            let t = orc.eigenstate(b).unwrap();
            assert_eq!(s.amplitudes(), t.amplitudes());
        }
    }
}
