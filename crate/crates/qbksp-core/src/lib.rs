//! Block Krylov subspace projector (QBKSP) eigensolver.
//!
//! Estimates low-lying (and high-lying) eigenenergies of a qubit Hamiltonian
//! H = Σ_k c_k P_k from the phases of its real-time propagator
//! U(t) = exp(-iHt). A block of B reference states is propagated on a linear
//! time grid, the overlap matrix S and propagated-overlap matrix T are
//! assembled in block-Toeplitz form, and the generalized eigenvalue problem
//! T x = λ S x is regularized by singular-value truncation and solved in the
//! reduced basis. Eigenphases arg(λ) map back to energies via E = -arg(λ)/τ.
//!
//! Matrix elements ⟨ψ_β| U(kτ) |ψ_α⟩ can be produced by three measurement
//! models: exact statevector arithmetic, exact values rounded to a fixed
//! number of decimals, or binomially sampled Hadamard-test ancilla statistics
//! over a Trotterized propagator.
//!
//! The crate is `no_std` (with `alloc`); file formats, experiment configs and
//! the CLI live in the companion `qbksp-cli` crate.

#![no_std]

extern crate alloc;

pub mod expectation;
pub mod krylov;
pub mod linalg;
pub mod pauli;
pub mod reference;
pub mod regularize;
pub mod statevector;

pub use num_complex::Complex64;

/// Errors below 1.6 mHartree count as chemically accurate.
pub const CHEMICAL_ACCURACY: f64 = 1.6e-3;
