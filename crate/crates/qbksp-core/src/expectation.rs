//! Matrix elements ⟨ψ_β| U(t) |ψ_α⟩ under three measurement models.
//!
//! The exact model evaluates the element in statevector arithmetic; the
//! rounded model truncates exact values to a fixed number of decimals; the
//! shot model draws binomial ancilla counts from the closed-form
//! Hadamard-test probabilities over a Trotterized propagator. Three circuit
//! variants differ in which operations are controlled:
//!
//! * variant A prepares α uncontrolled and controls U(t) and V†_{βα},
//!   where V_{βα} maps α to β;
//! * variant B controls W_α, U(t) and W†_β on the ancilla's |1⟩ branch;
//! * variant C controls W_α and U(t) on |0⟩ (open controls) and W_β on |1⟩.
//!
//! All three yield P(0) = (1 ± Re/Im ⟨ψ_β|U|ψ_α⟩)/2; variant C flips the
//! sign convention of the imaginary part. A full (n+1)-qubit simulation of
//! each gate list is kept as a cross-check of the closed forms; production
//! sampling draws directly from the analytic probabilities, which is
//! statistically identical for these deterministic circuits.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::pauli::PauliHamiltonian;
use crate::statevector::{
    inner_raw, trotter2_raw, ExactPropagator, StateError, Statevector,
};

/// Hadamard-test circuit layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitVariant {
    A,
    B,
    C,
}

/// Which quadrature a circuit measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitPart {
    Real,
    Imaginary,
}

/// How matrix elements are produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementModel {
    /// Exact statevector arithmetic.
    Exact,
    /// Exact values rounded to `digits` decimal places per component.
    Rounded { digits: u32 },
    /// Binomial sampling of Hadamard-test ancilla counts over a
    /// Trotterized propagator.
    Shots(ShotModel),
}

impl MeasurementModel {
    pub fn validate(&self) -> Result<(), ExpectationError> {
        match self {
            MeasurementModel::Exact => Ok(()),
            MeasurementModel::Rounded { digits } => {
                if *digits < 1 {
                    Err(ExpectationError::BadModel("precision must be >= 1 digit"))
                } else {
                    Ok(())
                }
            }
            MeasurementModel::Shots(s) => {
                if s.n_shots < 1 {
                    Err(ExpectationError::BadModel("shot count must be >= 1"))
                } else if !s.trotter_dt.is_finite() || s.trotter_dt <= 0.0 {
                    Err(ExpectationError::BadModel("Trotter step must be positive"))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Parameters of the shot-sampled model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotModel {
    pub n_shots: u64,
    pub trotter_dt: f64,
    pub variant: CircuitVariant,
    pub seed: u64,
}

/// Identity of one matrix element; keys the per-element random streams so
/// results do not depend on evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementKey {
    pub row: usize,
    pub col: usize,
    pub step: usize,
}

/// Control polarity of a controlled gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlPolarity {
    /// Fires when the ancilla is |1⟩.
    One,
    /// Open control: fires when the ancilla is |0⟩.
    Zero,
}

/// System-register operations appearing in the circuits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitOp {
    PrepareAlpha,
    PrepareBeta,
    PrepareBetaDagger,
    /// V†_{βα}, the inverse of the unitary taking α to β.
    MapAlphaToBetaDagger,
    /// U(t).
    Propagate,
}

/// One gate of a Hadamard-test circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    AncillaHadamard,
    AncillaSDagger,
    UncontrolledPrepareAlpha,
    Controlled {
        polarity: ControlPolarity,
        op: CircuitOp,
    },
    MeasureAncilla,
}

/// Gate list of one Hadamard-test circuit on one ancilla plus `n_system`
/// qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitDescription {
    pub variant: CircuitVariant,
    pub part: CircuitPart,
    pub n_system_qubits: usize,
    pub gates: Vec<Gate>,
}

impl CircuitDescription {
    /// Canonical gate list for a variant and part.
    pub fn build(variant: CircuitVariant, part: CircuitPart, n_system_qubits: usize) -> Self {
        let mut gates = vec![Gate::AncillaHadamard];
        match variant {
            CircuitVariant::A => {
                gates.push(Gate::UncontrolledPrepareAlpha);
                gates.push(Gate::Controlled {
                    polarity: ControlPolarity::One,
                    op: CircuitOp::Propagate,
                });
                gates.push(Gate::Controlled {
                    polarity: ControlPolarity::One,
                    op: CircuitOp::MapAlphaToBetaDagger,
                });
            }
            CircuitVariant::B => {
                gates.push(Gate::Controlled {
                    polarity: ControlPolarity::One,
                    op: CircuitOp::PrepareAlpha,
                });
                gates.push(Gate::Controlled {
                    polarity: ControlPolarity::One,
                    op: CircuitOp::Propagate,
                });
                gates.push(Gate::Controlled {
                    polarity: ControlPolarity::One,
                    op: CircuitOp::PrepareBetaDagger,
                });
            }
            CircuitVariant::C => {
                gates.push(Gate::Controlled {
                    polarity: ControlPolarity::Zero,
                    op: CircuitOp::PrepareAlpha,
                });
                gates.push(Gate::Controlled {
                    polarity: ControlPolarity::Zero,
                    op: CircuitOp::Propagate,
                });
                gates.push(Gate::Controlled {
                    polarity: ControlPolarity::One,
                    op: CircuitOp::PrepareBeta,
                });
            }
        }
        if part == CircuitPart::Imaginary {
            gates.push(Gate::AncillaSDagger);
        }
        gates.push(Gate::AncillaHadamard);
        gates.push(Gate::MeasureAncilla);
        Self {
            variant,
            part,
            n_system_qubits,
            gates,
        }
    }
}

/// Exact matrix element ⟨β| U(t) |α⟩.
pub fn exact_element(
    prop: &ExactPropagator,
    t: f64,
    beta: &Statevector,
    alpha: &Statevector,
) -> Result<Complex64, ExpectationError> {
    let evolved = prop.evolve(t, alpha)?;
    Ok(beta.inner(&evolved)?)
}

/// Round both components half-away-from-zero to `digits` decimal places.
pub fn round_element(z: Complex64, digits: u32) -> Complex64 {
    Complex64::new(round_half_away(z.re, digits), round_half_away(z.im, digits))
}

fn round_half_away(x: f64, digits: u32) -> f64 {
    let p = libm::pow(10.0, digits as f64);
    let y = libm::floor(x.abs() * p + 0.5) / p;
    if x < 0.0 {
        -y
    } else {
        y
    }
}

/// Closed-form probability of measuring the ancilla in |0⟩ given the true
/// element value. Variants A and B give (1 + Re/Im)/2; variant C measures
/// the imaginary part with the opposite sign, P(0) = (1 - Im)/2.
pub fn analytic_ancilla_p0(
    variant: CircuitVariant,
    part: CircuitPart,
    value: Complex64,
) -> Result<f64, ExpectationError> {
    if value.norm() > 1.0 + 1e-9 {
        return Err(ExpectationError::ValueOutOfRange { modulus: value.norm() });
    }
    let quadrature = match part {
        CircuitPart::Real => value.re,
        CircuitPart::Imaginary => value.im,
    };
    let signed = match (variant, part) {
        (CircuitVariant::C, CircuitPart::Imaginary) => -quadrature,
        _ => quadrature,
    };
    Ok(0.5 * (1.0 + signed))
}

/// Sign of the imaginary-part estimator: P(0)-P(1) equals +Im for variants
/// A and B and -Im for variant C.
pub fn imaginary_sign(variant: CircuitVariant) -> f64 {
    match variant {
        CircuitVariant::C => -1.0,
        _ => 1.0,
    }
}

/// Exact unitary mapping one state onto another: identity on the orthogonal
/// complement of span{source, target}, a 2x2 rotation inside it. Valid for
/// arbitrary complex overlap, unlike a single Householder reflection.
#[derive(Debug, Clone)]
pub struct StatePreparation {
    source: Vec<Complex64>,
    /// Normalized component of the target orthogonal to the source; `None`
    /// when the target is the source up to a phase.
    residual: Option<Vec<Complex64>>,
    overlap: Complex64,
    residual_norm: f64,
}

impl StatePreparation {
    /// Unitary with W(source) = target exactly (including phase).
    pub fn new(source: &Statevector, target: &Statevector) -> Result<Self, ExpectationError> {
        if source.n_qubits() != target.n_qubits() {
            return Err(ExpectationError::State(StateError::DimensionMismatch {
                left: source.n_qubits(),
                right: target.n_qubits(),
            }));
        }
        let c = source.inner(target)?;
        let mut residual: Vec<Complex64> = target
            .amplitudes()
            .iter()
            .zip(source.amplitudes())
            .map(|(t, s)| t - c * s)
            .collect();
        let rn = libm::sqrt(residual.iter().map(|z| z.norm_sqr()).sum());
        if rn < 1e-14 {
            return Ok(Self {
                source: source.amplitudes().to_vec(),
                residual: None,
                overlap: c / c.norm(),
                residual_norm: 0.0,
            });
        }
        for z in residual.iter_mut() {
            *z /= rn;
        }
        Ok(Self {
            source: source.amplitudes().to_vec(),
            residual: Some(residual),
            overlap: c,
            residual_norm: rn,
        })
    }

    /// Preparation of `target` from |0...0⟩.
    pub fn from_zero(target: &Statevector) -> Result<Self, ExpectationError> {
        let zero = Statevector::zero_state(target.n_qubits());
        Self::new(&zero, target)
    }

    /// Apply W in place.
    pub fn apply(&self, amps: &mut [Complex64]) {
        let c = self.overlap;
        let sn = self.residual_norm;
        let a = inner_raw(&self.source, amps);
        match &self.residual {
            None => {
                // pure phase on the source direction
                let coeff = (c - 1.0) * a;
                for (x, s) in amps.iter_mut().zip(&self.source) {
                    *x += coeff * s;
                }
            }
            Some(p) => {
                let b = inner_raw(p, amps);
                let cs = (c - 1.0) * a - sn * b;
                let cp = sn * a + (c.conj() - 1.0) * b;
                for i in 0..amps.len() {
                    amps[i] += cs * self.source[i] + cp * p[i];
                }
            }
        }
    }

    /// Apply W† in place.
    pub fn apply_inverse(&self, amps: &mut [Complex64]) {
        let c = self.overlap;
        let sn = self.residual_norm;
        let a = inner_raw(&self.source, amps);
        match &self.residual {
            None => {
                let coeff = (c.conj() - 1.0) * a;
                for (x, s) in amps.iter_mut().zip(&self.source) {
                    *x += coeff * s;
                }
            }
            Some(p) => {
                let b = inner_raw(p, amps);
                let cs = (c.conj() - 1.0) * a + sn * b;
                let cp = -sn * a + (c - 1.0) * b;
                for i in 0..amps.len() {
                    amps[i] += cs * self.source[i] + cp * p[i];
                }
            }
        }
    }
}

/// Full statevector simulation of a Hadamard-test circuit; returns the
/// probability of measuring the ancilla in |0⟩.
///
/// The (n+1)-qubit register is tracked as the pair of system branches
/// conditioned on the ancilla. `propagate` applies U(t) to a branch.
pub fn simulate_circuit_p0(
    desc: &CircuitDescription,
    propagate: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    alpha: &Statevector,
    beta: &Statevector,
) -> Result<f64, ExpectationError> {
    if alpha.n_qubits() != desc.n_system_qubits || beta.n_qubits() != desc.n_system_qubits {
        return Err(ExpectationError::State(StateError::DimensionMismatch {
            left: alpha.n_qubits(),
            right: desc.n_system_qubits,
        }));
    }
    let dim = 1usize << desc.n_system_qubits;
    let prep_alpha = StatePreparation::from_zero(alpha)?;
    let prep_beta = StatePreparation::from_zero(beta)?;
    let map_ab = StatePreparation::new(alpha, beta)?;

    // branch_zero: system amplitudes with the ancilla in |0⟩, branch_one: |1⟩
    let mut branch_zero = vec![Complex64::new(0.0, 0.0); dim];
    branch_zero[0] = Complex64::new(1.0, 0.0);
    let mut branch_one = vec![Complex64::new(0.0, 0.0); dim];

    let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
    for gate in &desc.gates {
        match gate {
            Gate::AncillaHadamard => {
                for i in 0..dim {
                    let a = branch_zero[i];
                    let b = branch_one[i];
                    branch_zero[i] = (a + b) * inv_sqrt2;
                    branch_one[i] = (a - b) * inv_sqrt2;
                }
            }
            Gate::AncillaSDagger => {
                let mi = Complex64::new(0.0, -1.0);
                for z in branch_one.iter_mut() {
                    *z *= mi;
                }
            }
            Gate::UncontrolledPrepareAlpha => {
                prep_alpha.apply(&mut branch_zero);
                prep_alpha.apply(&mut branch_one);
            }
            Gate::Controlled { polarity, op } => {
                let branch = match polarity {
                    ControlPolarity::One => &mut branch_one,
                    ControlPolarity::Zero => &mut branch_zero,
                };
                match op {
                    CircuitOp::PrepareAlpha => prep_alpha.apply(branch),
                    CircuitOp::PrepareBeta => prep_beta.apply(branch),
                    CircuitOp::PrepareBetaDagger => prep_beta.apply_inverse(branch),
                    CircuitOp::MapAlphaToBetaDagger => map_ab.apply_inverse(branch),
                    CircuitOp::Propagate => *branch = propagate(branch),
                }
            }
            Gate::MeasureAncilla => {
                return Ok(branch_zero.iter().map(|z| z.norm_sqr()).sum());
            }
        }
    }
    Err(ExpectationError::BadModel("circuit has no measurement"))
}

/// Shot-sampled estimate of ⟨β| U(t) |α⟩ with U Trotterized at the model's
/// step size. Both quadratures consume independent budgets of `n_shots`;
/// the binomial streams are keyed by `(seed, key, part)` so the estimate is
/// deterministic and independent of evaluation order.
pub fn sampled_element(
    model: &ShotModel,
    ham_normalized: &PauliHamiltonian,
    t: f64,
    beta: &Statevector,
    alpha: &Statevector,
    key: ElementKey,
) -> Result<Complex64, ExpectationError> {
    if alpha.n_qubits() != ham_normalized.n_qubits() || beta.n_qubits() != ham_normalized.n_qubits()
    {
        return Err(ExpectationError::State(StateError::DimensionMismatch {
            left: alpha.n_qubits(),
            right: ham_normalized.n_qubits(),
        }));
    }
    let mut amps = alpha.amplitudes().to_vec();
    trotter2_raw(ham_normalized, t, model.trotter_dt, &mut amps);
    let value = inner_raw(beta.amplitudes(), &amps);

    let p0_re = analytic_ancilla_p0(model.variant, CircuitPart::Real, value)?.clamp(0.0, 1.0);
    let p0_im = analytic_ancilla_p0(model.variant, CircuitPart::Imaginary, value)?.clamp(0.0, 1.0);

    let re = sample_quadrature(model, key, 0, p0_re);
    let im_raw = sample_quadrature(model, key, 1, p0_im);
    Ok(Complex64::new(re, imaginary_sign(model.variant) * im_raw))
}

/// Draw n0 ~ Binomial(n_shots, p0) from the keyed stream and return the
/// estimator 2·n0/n_shots - 1 of P(0) - P(1).
fn sample_quadrature(model: &ShotModel, key: ElementKey, part_tag: u64, p0: f64) -> f64 {
    let mut rng = element_stream(model.seed, key, part_tag);
    let n0 = if p0 <= 0.0 {
        0
    } else if p0 >= 1.0 {
        model.n_shots
    } else {
        Binomial::new(model.n_shots, p0)
            .expect("probability in (0, 1)")
            .sample(&mut rng)
    };
    2.0 * (n0 as f64) / (model.n_shots as f64) - 1.0
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Independent ChaCha stream for one (element, quadrature) pair.
fn element_stream(seed: u64, key: ElementKey, part_tag: u64) -> ChaCha8Rng {
    let mut state = seed
        ^ (key.row as u64).wrapping_mul(0xa076_1d64_78bd_642f)
        ^ (key.col as u64).wrapping_mul(0xe703_7ed1_a0b4_28db)
        ^ (key.step as u64).wrapping_mul(0x8ebc_6af0_9c88_c6e3)
        ^ part_tag.wrapping_mul(0x5897_89e6_c7c0_c8b3);
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// Errors from element evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpectationError {
    ValueOutOfRange { modulus: f64 },
    BadModel(&'static str),
    State(StateError),
}

impl fmt::Display for ExpectationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpectationError::ValueOutOfRange { modulus } => {
                write!(f, "element modulus {modulus} exceeds 1 beyond tolerance")
            }
            ExpectationError::BadModel(msg) => write!(f, "invalid measurement model: {msg}"),
            ExpectationError::State(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ExpectationError {}

impl From<StateError> for ExpectationError {
    fn from(e: StateError) -> Self {
        ExpectationError::State(e)
    }
}
