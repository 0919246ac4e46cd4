//! Dense statevector engine.
//!
//! States are unit-norm complex vectors of dimension 2^n (qubit 0 is the
//! most significant index bit, matching the Pauli-string convention).
//! Real-time evolution exp(-iHt) comes in two backends: exact propagation
//! through a one-time dense eigendecomposition, and second-order (Strang)
//! Trotterization over the Hamiltonian's Pauli terms.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::linalg::{eigh, DenseMatrix, LinalgError};
use crate::pauli::{NormalizationRecord, PauliHamiltonian, PauliString};

const NORM_TOL: f64 = 1e-12;

/// Unit-norm state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// The computational basis state |index⟩.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self, StateError> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(StateError::BasisIndexOutOfRange { index, dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// |0...0⟩ on `n_qubits` qubits.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0).expect("index 0 always valid")
    }

    /// Build from amplitudes, requiring unit norm to within 1e-12.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, StateError> {
        let n_qubits = dim_to_qubits(amps.len())?;
        let state = Self { n_qubits, amps };
        let dev = (state.norm() - 1.0).abs();
        if !dev.is_finite() || dev > NORM_TOL {
            return Err(StateError::NotNormalized { deviation: dev });
        }
        Ok(state)
    }

    /// Build from amplitudes of any nonzero norm, rescaling to unit norm.
    /// Returns the state and the input's deviation from unit norm.
    pub fn from_amplitudes_normalized(
        mut amps: Vec<Complex64>,
    ) -> Result<(Self, f64), StateError> {
        let n_qubits = dim_to_qubits(amps.len())?;
        let norm = libm::sqrt(amps.iter().map(|z| z.norm_sqr()).sum());
        if !norm.is_finite() || norm == 0.0 {
            return Err(StateError::NotNormalized {
                deviation: f64::INFINITY,
            });
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Ok((Self { n_qubits, amps }, (norm - 1.0).abs()))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amps.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn is_real(&self) -> bool {
        self.amps.iter().all(|z| z.im == 0.0)
    }

    /// ⟨self|other⟩, conjugating `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64, StateError> {
        if self.n_qubits != other.n_qubits {
            return Err(StateError::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(inner_raw(&self.amps, &other.amps))
    }

    /// Apply exp(-iθP) = cos θ · I - i sin θ · P matrix-free.
    pub fn apply_pauli_exp(&self, string: &PauliString, theta: f64) -> Result<Self, StateError> {
        if string.len() != self.n_qubits {
            return Err(StateError::DimensionMismatch {
                left: string.len(),
                right: self.n_qubits,
            });
        }
        let mut amps = self.amps.clone();
        apply_pauli_exp_raw(string, theta, &mut amps);
        Ok(Self {
            n_qubits: self.n_qubits,
            amps,
        })
    }

    /// Parse the text format: one `<re> <im>` amplitude per line, length 2^n.
    /// Normalizes on load and reports the input's norm deviation.
    pub fn parse_text(text: &str) -> Result<(Self, f64), StateError> {
        let mut amps = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let re: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or(StateError::MalformedAmplitude { line: idx + 1 })?;
            let im: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or(StateError::MalformedAmplitude { line: idx + 1 })?;
            if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
                return Err(StateError::MalformedAmplitude { line: idx + 1 });
            }
            amps.push(Complex64::new(re, im));
        }
        Self::from_amplitudes_normalized(amps)
    }

    /// Render in the text format accepted by [`Statevector::parse_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for a in &self.amps {
            out.push_str(&format!("{:.17e} {:.17e}\n", a.re, a.im));
        }
        out
    }
}

fn dim_to_qubits(dim: usize) -> Result<usize, StateError> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(StateError::BadDimension { dim });
    }
    Ok(dim.trailing_zeros() as usize)
}

pub(crate) fn inner_raw(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// In-place exp(-iθP) on raw amplitudes.
pub(crate) fn apply_pauli_exp_raw(string: &PauliString, theta: f64, amps: &mut [Complex64]) {
    let c = Complex64::new(libm::cos(theta), 0.0);
    let mis = Complex64::new(0.0, -libm::sin(theta));
    let flip = string.flip_mask();
    if flip == 0 {
        // diagonal string: pure phase per basis state
        for (idx, a) in amps.iter_mut().enumerate() {
            let p = string.amplitude_on(idx);
            *a *= c + mis * p;
        }
    } else {
        for idx in 0..amps.len() {
            let partner = idx ^ flip;
            if partner < idx {
                continue;
            }
            // P|idx⟩ = p_idx |partner⟩ and P|partner⟩ = p_partner |idx⟩
            let p_idx = string.amplitude_on(idx);
            let p_partner = string.amplitude_on(partner);
            let ai = amps[idx];
            let ap = amps[partner];
            amps[idx] = c * ai + mis * p_partner * ap;
            amps[partner] = c * ap + mis * p_idx * ai;
        }
    }
}

/// Exact real-time propagator built from one dense eigendecomposition of a
/// normalized Hamiltonian; applications then cost one basis change each way.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    eigenvalues: Vec<f64>,
    eigenvectors: DenseMatrix,
    record: NormalizationRecord,
    n_qubits: usize,
}

impl ExactPropagator {
    /// Diagonalize a normalized Hamiltonian. Fails if the spectrum escapes
    /// [-1, 1] (which signals an unnormalized input).
    pub fn new(
        ham: &PauliHamiltonian,
        record: NormalizationRecord,
    ) -> Result<Self, StateError> {
        let dense = ham.to_dense();
        let (eigenvalues, eigenvectors) = eigh(&dense).map_err(StateError::Linalg)?;
        let bound = 1.0 + 1e-9;
        if eigenvalues.iter().any(|&e| e < -bound || e > bound) {
            return Err(StateError::NotNormalizedSpectrum);
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
            record,
            n_qubits: ham.n_qubits(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Normalized eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Physical (de-normalized) eigenvalues, ascending.
    pub fn physical_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|&e| self.record.denormalize(e))
            .collect()
    }

    pub fn record(&self) -> NormalizationRecord {
        self.record
    }

    /// Assemble from a precomputed eigendecomposition (normalized
    /// eigenvalues ascending, eigenvectors as columns).
    pub fn from_parts(
        eigenvalues: Vec<f64>,
        eigenvectors: DenseMatrix,
        record: NormalizationRecord,
        n_qubits: usize,
    ) -> Result<Self, StateError> {
        if eigenvectors.rows() != 1usize << n_qubits
            || eigenvectors.cols() != eigenvalues.len()
            || eigenvalues.len() != 1usize << n_qubits
        {
            return Err(StateError::BadDimension {
                dim: eigenvalues.len(),
            });
        }
        let bound = 1.0 + 1e-9;
        if eigenvalues.iter().any(|&e| e < -bound || e > bound) {
            return Err(StateError::NotNormalizedSpectrum);
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
            record,
            n_qubits,
        })
    }

    /// Coefficients V†ψ of a state in the eigenbasis.
    pub fn spectral_coefficients(&self, psi: &Statevector) -> Result<Vec<Complex64>, StateError> {
        if psi.n_qubits() != self.n_qubits {
            return Err(StateError::DimensionMismatch {
                left: psi.n_qubits(),
                right: self.n_qubits,
            });
        }
        Ok(self.eigenvectors.adjoint_matvec(psi.amplitudes()))
    }

    /// The k-th eigenstate (ascending order).
    pub fn eigenstate(&self, k: usize) -> Result<Statevector, StateError> {
        if k >= self.eigenvalues.len() {
            return Err(StateError::BasisIndexOutOfRange {
                index: k,
                dim: self.eigenvalues.len(),
            });
        }
        Statevector::from_amplitudes(self.eigenvectors.column(k))
    }

    /// exp(-iHt)|ψ⟩ = Σ_k e^{-iλ_k t} |v_k⟩⟨v_k|ψ⟩.
    pub fn evolve(&self, t: f64, psi: &Statevector) -> Result<Statevector, StateError> {
        if psi.n_qubits() != self.n_qubits {
            return Err(StateError::DimensionMismatch {
                left: psi.n_qubits(),
                right: self.n_qubits,
            });
        }
        if !t.is_finite() {
            return Err(StateError::NonFiniteTime);
        }
        let amps = self.evolve_raw(t, psi.amplitudes());
        Ok(Statevector {
            n_qubits: self.n_qubits,
            amps,
        })
    }

    /// Evolution on raw amplitudes (no norm bookkeeping); used by the
    /// Hadamard-test circuit simulation where branches are unnormalized.
    pub fn evolve_raw(&self, t: f64, amps: &[Complex64]) -> Vec<Complex64> {
        let mut coeffs = self.eigenvectors.adjoint_matvec(amps);
        for (c, &lam) in coeffs.iter_mut().zip(&self.eigenvalues) {
            let angle = -lam * t;
            *c *= Complex64::new(libm::cos(angle), libm::sin(angle));
        }
        self.eigenvectors.matvec(&coeffs)
    }
}

/// Second-order (Strang) Trotterized evolution: each step of size h applies
/// half-angle exponentials of every term in construction order, then the
/// same half-angles in reverse. The final step is shortened so the total
/// evolved time equals `t` exactly.
pub fn evolve_trotter2(
    ham: &PauliHamiltonian,
    t: f64,
    dt: f64,
    psi: &Statevector,
) -> Result<Statevector, StateError> {
    if psi.n_qubits() != ham.n_qubits() {
        return Err(StateError::DimensionMismatch {
            left: psi.n_qubits(),
            right: ham.n_qubits(),
        });
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(StateError::BadTimeStep { dt });
    }
    if !t.is_finite() || t < 0.0 {
        return Err(StateError::NonFiniteTime);
    }
    let mut amps = psi.amplitudes().to_vec();
    trotter2_raw(ham, t, dt, &mut amps);
    Ok(Statevector {
        n_qubits: psi.n_qubits(),
        amps,
    })
}

pub(crate) fn trotter2_raw(ham: &PauliHamiltonian, t: f64, dt: f64, amps: &mut [Complex64]) {
    if t == 0.0 {
        return;
    }
    let n_steps = libm::ceil(t / dt) as usize;
    let mut remaining = t;
    for _ in 0..n_steps {
        let h = if remaining > dt { dt } else { remaining };
        for (c, s) in ham.terms() {
            apply_pauli_exp_raw(s, c * h / 2.0, amps);
        }
        for (c, s) in ham.terms().iter().rev() {
            apply_pauli_exp_raw(s, c * h / 2.0, amps);
        }
        remaining -= h;
    }
}

/// Errors from statevector construction and evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum StateError {
    BadDimension { dim: usize },
    BasisIndexOutOfRange { index: usize, dim: usize },
    NotNormalized { deviation: f64 },
    DimensionMismatch { left: usize, right: usize },
    MalformedAmplitude { line: usize },
    NonFiniteTime,
    BadTimeStep { dt: f64 },
    NotNormalizedSpectrum,
    Linalg(LinalgError),
}

impl fmt::Display for StateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateError::BadDimension { dim } => {
                write!(f, "amplitude count {dim} is not a power of two >= 2")
            }
            StateError::BasisIndexOutOfRange { index, dim } => {
                write!(f, "index {index} out of range for dimension {dim}")
            }
            StateError::NotNormalized { deviation } => {
                write!(f, "state norm deviates from 1 by {deviation:.3e}")
            }
            StateError::DimensionMismatch { left, right } => {
                write!(f, "qubit counts differ: {left} vs {right}")
            }
            StateError::MalformedAmplitude { line } => {
                write!(f, "malformed amplitude on line {line}")
            }
            StateError::NonFiniteTime => write!(f, "evolution time must be finite"),
            StateError::BadTimeStep { dt } => write!(f, "Trotter step must be positive, got {dt}"),
            StateError::NotNormalizedSpectrum => {
                write!(f, "spectrum outside [-1, 1]; Hamiltonian must be normalized")
            }
            StateError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for StateError {}

impl From<LinalgError> for StateError {
    fn from(e: LinalgError) -> Self {
        StateError::Linalg(e)
    }
}
