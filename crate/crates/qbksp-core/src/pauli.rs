//! Weighted Pauli-string Hamiltonians.
//!
//! A Hamiltonian is a sum H = Σ_k c_k P_k with real coefficients c_k and
//! Pauli strings P_k over {I, X, Y, Z}. The module also provides the
//! open-chain Heisenberg model, spectrum normalization into [-1, 1], and the
//! closed-form measurement counts of the block Krylov scheme.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::linalg::DenseMatrix;

/// Single-qubit Pauli operator label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis, one per qubit.
///
/// The first label acts on qubit 0, which is the most significant bit of a
/// basis-state index: the dense matrix of a string is the Kronecker product
/// of its labels in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    /// Build from per-qubit labels. Fails on an empty sequence.
    pub fn new(ops: Vec<Pauli>) -> Result<Self, PauliError> {
        if ops.is_empty() {
            return Err(PauliError::EmptyString);
        }
        Ok(Self { ops })
    }

    /// Parse a label string such as `"XIZY"`.
    pub fn parse(s: &str) -> Result<Self, PauliError> {
        let ops = s
            .chars()
            .map(|c| Pauli::from_char(c).ok_or(PauliError::BadLabel(c)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(ops)
    }

    /// The all-identity string on `n` qubits.
    pub fn identity(n: usize) -> Result<Self, PauliError> {
        Self::new(alloc::vec![Pauli::I; n])
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I)
    }

    /// Number of Y labels. A real-coefficient Hamiltonian has a real
    /// symmetric dense matrix exactly when every term has an even Y count.
    pub fn y_count(&self) -> usize {
        self.ops.iter().filter(|&&p| p == Pauli::Y).count()
    }

    /// Bit mask (qubit 0 = most significant) of qubits whose basis bit is
    /// flipped by this string, i.e. positions carrying X or Y.
    pub fn flip_mask(&self) -> usize {
        let n = self.ops.len();
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == Pauli::X || p == Pauli::Y)
            .fold(0usize, |m, (q, _)| m | (1 << (n - 1 - q)))
    }

    /// Bit mask of qubits contributing a (-1)^bit phase, i.e. positions
    /// carrying Y or Z.
    pub fn phase_mask(&self) -> usize {
        let n = self.ops.len();
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == Pauli::Y || p == Pauli::Z)
            .fold(0usize, |m, (q, _)| m | (1 << (n - 1 - q)))
    }

    /// Amplitude factor of P acting on basis state `index`:
    /// P|index⟩ = coeff · |index ^ flip_mask⟩.
    pub fn amplitude_on(&self, index: usize) -> Complex64 {
        let i_pow = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        let y = self.y_count();
        let sign_bits = (index & self.phase_mask()).count_ones() as usize;
        let mut amp = i_pow[y % 4];
        if sign_bits % 2 == 1 {
            amp = -amp;
        }
        amp
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &p in &self.ops {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

/// A weighted sum of Pauli strings with real coefficients.
///
/// Terms are merged on construction (no string appears twice) and exact
/// zeros are dropped, so term counts are canonical.
#[derive(Debug, Clone)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliHamiltonian {
    /// Build from raw terms, merging duplicates and dropping exact zeros.
    pub fn from_terms(
        n_qubits: usize,
        terms: Vec<(f64, PauliString)>,
    ) -> Result<Self, PauliError> {
        if n_qubits == 0 {
            return Err(PauliError::NoQubits);
        }
        let mut merged: Vec<(f64, PauliString)> = Vec::new();
        for (c, s) in terms {
            if s.len() != n_qubits {
                return Err(PauliError::LengthMismatch {
                    expected: n_qubits,
                    got: s.len(),
                });
            }
            if !c.is_finite() {
                return Err(PauliError::NonFiniteCoefficient);
            }
            match merged.iter_mut().find(|(_, t)| *t == s) {
                Some((c0, _)) => *c0 += c,
                None => merged.push((c, s)),
            }
        }
        merged.retain(|(c, _)| *c != 0.0);
        if merged.is_empty() {
            return Err(PauliError::Empty);
        }
        Ok(Self {
            n_qubits,
            terms: merged,
        })
    }

    /// Isotropic-exchange spin chain with open boundaries:
    /// H = -Σ_{i} (J_x X_i X_{i+1} + J_y Y_i Y_{i+1} + J_z Z_i Z_{i+1}).
    pub fn heisenberg_chain(n_sites: usize, coupling: [f64; 3]) -> Result<Self, PauliError> {
        if n_sites < 2 {
            return Err(PauliError::ChainTooShort(n_sites));
        }
        let axes = [Pauli::X, Pauli::Y, Pauli::Z];
        let mut terms = Vec::with_capacity(3 * (n_sites - 1));
        for site in 0..n_sites - 1 {
            for (a, &p) in axes.iter().enumerate() {
                let mut ops = alloc::vec![Pauli::I; n_sites];
                ops[site] = p;
                ops[site + 1] = p;
                terms.push((-coupling[a], PauliString::new(ops)?));
            }
        }
        Self::from_terms(n_sites, terms)
    }

    /// Parse the text format: one `<coefficient> <pauli string>` per line,
    /// blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Result<Self, PauliError> {
        let mut terms: Vec<(f64, PauliString)> = Vec::new();
        let mut n_qubits = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let coeff_s = parts.next().ok_or(PauliError::Malformed { line: line_no })?;
            let string_s = parts.next().ok_or(PauliError::Malformed { line: line_no })?;
            if parts.next().is_some() {
                return Err(PauliError::Malformed { line: line_no });
            }
            let coeff: f64 = coeff_s
                .parse()
                .map_err(|_| PauliError::BadCoefficient { line: line_no })?;
            if !coeff.is_finite() {
                return Err(PauliError::BadCoefficient { line: line_no });
            }
            let string = PauliString::parse(string_s)
                .map_err(|_| PauliError::Malformed { line: line_no })?;
            match n_qubits {
                None => n_qubits = Some(string.len()),
                Some(n) if n != string.len() => {
                    return Err(PauliError::InconsistentLength { line: line_no })
                }
                _ => {}
            }
            terms.push((coeff, string));
        }
        let n = n_qubits.ok_or(PauliError::Empty)?;
        Self::from_terms(n, terms)
    }

    /// Render in the same text format accepted by [`PauliHamiltonian::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, s) in &self.terms {
            out.push_str(&format!("{c:.17e} {s}\n"));
        }
        out
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the all-identity term, 0 if absent.
    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .find(|(_, s)| s.is_identity())
            .map_or(0.0, |(c, _)| *c)
    }

    /// 1-norm of the non-identity coefficients; bounds the spectral radius
    /// of H - shift·I.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(_, s)| !s.is_identity())
            .map(|(c, _)| c.abs())
            .sum()
    }

    /// True when the dense matrix is real symmetric (every term carries an
    /// even number of Y labels).
    pub fn is_real_matrix(&self) -> bool {
        self.terms.iter().all(|(_, s)| s.y_count() % 2 == 0)
    }

    /// Rescale so the spectrum is certified inside [-1, 1]: the identity
    /// coefficient becomes the shift and the coefficient 1-norm the scale.
    pub fn normalized(&self) -> Result<(Self, NormalizationRecord), PauliError> {
        let shift = self.identity_coefficient();
        let scale = self.coefficient_norm();
        if scale == 0.0 {
            return Err(PauliError::DegenerateSpectrum);
        }
        Ok((
            self.rescaled(scale, shift)?,
            NormalizationRecord { scale, shift },
        ))
    }

    /// Rescale using known spectral bounds so the spectrum maps exactly onto
    /// [-1, 1]. The bounds come from an external diagonalization.
    pub fn normalized_to_bounds(
        &self,
        e_min: f64,
        e_max: f64,
    ) -> Result<(Self, NormalizationRecord), PauliError> {
        if !e_min.is_finite() || !e_max.is_finite() || e_min >= e_max {
            return Err(PauliError::DegenerateSpectrum);
        }
        let scale = (e_max - e_min) / 2.0;
        let shift = (e_max + e_min) / 2.0;
        Ok((
            self.rescaled(scale, shift)?,
            NormalizationRecord { scale, shift },
        ))
    }

    fn rescaled(&self, scale: f64, shift: f64) -> Result<Self, PauliError> {
        let mut terms: Vec<(f64, PauliString)> = Vec::with_capacity(self.terms.len() + 1);
        if shift != 0.0 {
            terms.push((-shift, PauliString::identity(self.n_qubits)?));
        }
        terms.extend(self.terms.iter().cloned());
        let terms = terms.into_iter().map(|(c, s)| (c / scale, s)).collect();
        Self::from_terms(self.n_qubits, terms)
    }

    /// Dense matrix of the Hamiltonian, dimension 2^n.
    pub fn to_dense(&self) -> DenseMatrix {
        let dim = 1usize << self.n_qubits;
        let mut m = DenseMatrix::zeros(dim, dim);
        for (c, s) in &self.terms {
            let flip = s.flip_mask();
            for col in 0..dim {
                // column `col` of P has its single entry in row col ^ flip
                let row = col ^ flip;
                let amp = s.amplitude_on(col);
                m[(row, col)] += amp * *c;
            }
        }
        m
    }
}

/// Invertible affine map between normalized and physical energies:
/// E = E_norm · scale + shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationRecord {
    pub scale: f64,
    pub shift: f64,
}

impl NormalizationRecord {
    /// No-op record (scale 1, shift 0).
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            shift: 0.0,
        }
    }

    pub fn denormalize(&self, e_norm: f64) -> f64 {
        e_norm * self.scale + self.shift
    }

    pub fn normalize(&self, e: f64) -> f64 {
        (e - self.shift) / self.scale
    }
}

/// Distinct matrix elements ⟨ψ_β|U(kτ)|ψ_α⟩ needed to assemble S and T for
/// K Krylov iterations with a block of B references.
///
/// Generic references need B²(K+1) + B(B-1)/2 values; known-orthogonal
/// references drop the initial overlaps, and real references halve each
/// block through the complex symmetry of U(t).
pub fn count_matrix_elements(b: u64, k: u64, real_refs: bool, orthogonal_refs: bool) -> u64 {
    let per_block = if real_refs { b * (b + 1) / 2 } else { b * b };
    let initial_overlaps = if orthogonal_refs { 0 } else { b * (b - 1) / 2 };
    per_block * (k + 1) + initial_overlaps
}

/// Distinct Hadamard-test circuits for the same matrices: two circuits
/// (real and imaginary part) per element. With `overlap_single_part` the
/// initial overlaps of real references are counted as one circuit each.
pub fn count_circuits(
    b: u64,
    k: u64,
    real_refs: bool,
    orthogonal_refs: bool,
    overlap_single_part: bool,
) -> u64 {
    let elements = count_matrix_elements(b, k, real_refs, orthogonal_refs);
    let mut circuits = 2 * elements;
    if overlap_single_part && real_refs && !orthogonal_refs {
        circuits -= b * (b - 1) / 2;
    }
    circuits
}

/// Errors from Hamiltonian construction and parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PauliError {
    EmptyString,
    BadLabel(char),
    NoQubits,
    Empty,
    LengthMismatch { expected: usize, got: usize },
    NonFiniteCoefficient,
    ChainTooShort(usize),
    Malformed { line: usize },
    BadCoefficient { line: usize },
    InconsistentLength { line: usize },
    DegenerateSpectrum,
}

impl fmt::Display for PauliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PauliError::EmptyString => write!(f, "Pauli string must act on at least one qubit"),
            PauliError::BadLabel(c) => write!(f, "invalid Pauli label '{c}'"),
            PauliError::NoQubits => write!(f, "Hamiltonian must act on at least one qubit"),
            PauliError::Empty => write!(f, "Hamiltonian has no terms"),
            PauliError::LengthMismatch { expected, got } => {
                write!(f, "Pauli string length {got} does not match {expected} qubits")
            }
            PauliError::NonFiniteCoefficient => write!(f, "coefficient is not finite"),
            PauliError::ChainTooShort(n) => {
                write!(f, "Heisenberg chain needs at least 2 sites, got {n}")
            }
            PauliError::Malformed { line } => write!(f, "malformed term on line {line}"),
            PauliError::BadCoefficient { line } => {
                write!(f, "invalid coefficient on line {line}")
            }
            PauliError::InconsistentLength { line } => {
                write!(f, "inconsistent Pauli string length on line {line}")
            }
            PauliError::DegenerateSpectrum => {
                write!(f, "spectrum is a single point, nothing to normalize")
            }
        }
    }
}

impl core::error::Error for PauliError {}
