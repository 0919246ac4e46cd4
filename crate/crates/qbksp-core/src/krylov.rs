//! The block Krylov subspace projector driver.
//!
//! Every iteration extends the element cache by one block
//! A^(k)_{ij} = ⟨ψ_i| U(kτ) |ψ_j⟩, assembles the block-Toeplitz matrices S
//! and T, regularizes the generalized eigenvalue problem by singular-value
//! truncation, solves the reduced problem, maps eigenphases to energies, and
//! tracks per-level convergence. A level's energy and multiplicity freeze at
//! first convergence, which keeps spurious late copies of degenerate levels
//! from inflating the recorded multiplicities.
//!
//! Symmetries cut the measurement count: A^(0) is Hermitian with unit
//! diagonal, so only its strict upper triangle is evaluated, and for real
//! references U(t) is complex symmetric, so blocks satisfy
//! A^(k)_{ji} = A^(k)_{ij} and only the upper triangle is measured.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::Cell;
use core::fmt;

use num_complex::Complex64;

use crate::expectation::{
    round_element, sampled_element, ElementKey, ExpectationError, MeasurementModel,
};
use crate::linalg::{eigh, DenseMatrix, LinalgError};
use crate::pauli::{count_matrix_elements, NormalizationRecord, PauliHamiltonian, PauliError};
use crate::regularize::{regularize, solve_reduced, RegularizationReport, RegularizeError};
use crate::statevector::{ExactPropagator, StateError, Statevector};

/// How the Hamiltonian spectrum is mapped into [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationMode {
    /// Shift by the identity coefficient, scale by the coefficient 1-norm.
    /// Certified without diagonalization.
    CoefficientNorm,
    /// Shift and scale from the exact spectral range, mapping the spectrum
    /// onto [-1, 1] exactly. Needs a dense diagonalization, so this is for
    /// oracle experiments at moderate qubit counts.
    Spectral,
}

/// Full description of one QBKSP run.
#[derive(Debug, Clone)]
pub struct QbkspConfig {
    pub references: Vec<Statevector>,
    /// Time step in atomic time units, in (0, π].
    pub tau: f64,
    /// Maximum Krylov iteration index (inclusive).
    pub k_max: usize,
    pub model: MeasurementModel,
    /// Singular-value truncation threshold.
    pub sigma: f64,
    /// A level is converged when its energy changes by at most this many
    /// Hartree across two consecutive iterations.
    pub per_state_tolerance: f64,
    /// Energies closer than this merge into one level with a multiplicity.
    pub degeneracy_cluster_tol: f64,
    /// Stop once this many levels are frozen.
    pub n_target: usize,
    /// Declare the initial overlaps zero instead of measuring them.
    pub orthogonal_references: bool,
    pub normalization: NormalizationMode,
}

impl QbkspConfig {
    fn validate(&self) -> Result<(), KrylovError> {
        if self.references.is_empty() {
            return Err(KrylovError::Config("reference block is empty"));
        }
        let n = self.references[0].n_qubits();
        if !self.references.iter().all(|r| r.n_qubits() == n) {
            return Err(KrylovError::Config("references have mixed qubit counts"));
        }
        if !self.tau.is_finite() || self.tau <= 0.0 || self.tau > core::f64::consts::PI {
            return Err(KrylovError::Config("tau must lie in (0, pi]"));
        }
        if self.n_target == 0 {
            return Err(KrylovError::Config("n_target must be at least 1"));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(KrylovError::Config("sigma must be non-negative"));
        }
        if self.per_state_tolerance <= 0.0
            || self.degeneracy_cluster_tol <= 0.0
            || !self.per_state_tolerance.is_finite()
            || !self.degeneracy_cluster_tol.is_finite()
        {
            return Err(KrylovError::Config("tolerances must be positive"));
        }
        self.model.validate().map_err(KrylovError::Expectation)?;
        Ok(())
    }
}

/// Measured blocks A^(k) for k = 0..=K+1.
#[derive(Debug, Clone)]
pub struct ElementCache {
    block_size: usize,
    tau: f64,
    blocks: Vec<DenseMatrix>,
}

impl ElementCache {
    pub fn new(block_size: usize, tau: f64) -> Self {
        Self {
            block_size,
            tau,
            blocks: Vec::new(),
        }
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn max_step(&self) -> Option<usize> {
        self.blocks.len().checked_sub(1)
    }

    pub fn block(&self, k: usize) -> Result<&DenseMatrix, KrylovError> {
        self.blocks.get(k).ok_or(KrylovError::MissingBlock { step: k })
    }

    pub fn push(&mut self, block: DenseMatrix) {
        debug_assert_eq!(block.rows(), self.block_size);
        debug_assert_eq!(block.cols(), self.block_size);
        self.blocks.push(block);
    }
}

/// The assembled matrices of the generalized eigenvalue problem.
#[derive(Debug, Clone)]
pub struct KrylovMatrices {
    pub t: DenseMatrix,
    pub s: DenseMatrix,
}

/// Element source shared by all measurement models, with a call counter
/// auditing the number of distinct evaluations.
pub struct MeasurementBackend<'a> {
    model: MeasurementModel,
    ham_normalized: &'a PauliHamiltonian,
    references: &'a [Statevector],
    tau: f64,
    /// Spectral coefficients V†ψ_b per reference (exact and rounded models).
    spectral: Option<SpectralCache>,
    calls: Cell<u64>,
}

struct SpectralCache {
    eigenvalues: Vec<f64>,
    coefficients: Vec<Vec<Complex64>>,
}

impl<'a> MeasurementBackend<'a> {
    pub fn new(
        model: MeasurementModel,
        ham_normalized: &'a PauliHamiltonian,
        propagator: Option<&ExactPropagator>,
        references: &'a [Statevector],
        tau: f64,
    ) -> Result<Self, KrylovError> {
        let spectral = match model {
            MeasurementModel::Exact | MeasurementModel::Rounded { .. } => {
                let prop = propagator.ok_or(KrylovError::Config(
                    "exact and rounded models need a propagator",
                ))?;
                let coefficients = references
                    .iter()
                    .map(|r| prop.spectral_coefficients(r))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(KrylovError::State)?;
                Some(SpectralCache {
                    eigenvalues: prop.eigenvalues().to_vec(),
                    coefficients,
                })
            }
            MeasurementModel::Shots(_) => None,
        };
        Ok(Self {
            model,
            ham_normalized,
            references,
            tau,
            spectral,
            calls: Cell::new(0),
        })
    }

    /// A^(step)_{row,col} = ⟨ψ_row| U(step·τ) |ψ_col⟩ under the configured
    /// measurement model. Each call is one audited evaluation.
    pub fn element(&self, step: usize, row: usize, col: usize) -> Result<Complex64, KrylovError> {
        self.calls.set(self.calls.get() + 1);
        let attach = |source: ExpectationError| KrylovError::Backend {
            step,
            row,
            col,
            message: source.to_string(),
        };
        match &self.model {
            MeasurementModel::Exact => Ok(self.spectral_element(step, row, col)),
            MeasurementModel::Rounded { digits } => {
                Ok(round_element(self.spectral_element(step, row, col), *digits))
            }
            MeasurementModel::Shots(shot) => sampled_element(
                shot,
                self.ham_normalized,
                step as f64 * self.tau,
                &self.references[row],
                &self.references[col],
                ElementKey { row, col, step },
            )
            .map_err(attach),
        }
    }

    fn spectral_element(&self, step: usize, row: usize, col: usize) -> Complex64 {
        let cache = self.spectral.as_ref().expect("exact model has coefficients");
        let t = step as f64 * self.tau;
        let mut acc = Complex64::new(0.0, 0.0);
        for ((cb, ca), &lam) in cache.coefficients[row]
            .iter()
            .zip(&cache.coefficients[col])
            .zip(&cache.eigenvalues)
        {
            let angle = -lam * t;
            acc += cb.conj() * ca * Complex64::new(libm::cos(angle), libm::sin(angle));
        }
        acc
    }

    pub fn elements_evaluated(&self) -> u64 {
        self.calls.get()
    }
}

/// Evaluate block A^(k) with the symmetry reductions.
///
/// Step 0 assumes a unit diagonal and Hermitian completion (only the strict
/// upper triangle is measured, or nothing for declared-orthogonal
/// references). Steps k >= 1 with real references measure the upper
/// triangle and complete the block by transpose symmetry.
pub fn evaluate_block(
    backend: &MeasurementBackend<'_>,
    block_size: usize,
    step: usize,
    real_references: bool,
    orthogonal_references: bool,
) -> Result<DenseMatrix, KrylovError> {
    let b = block_size;
    let mut m = DenseMatrix::zeros(b, b);
    if step == 0 {
        for i in 0..b {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        if !orthogonal_references {
            for i in 0..b {
                for j in i + 1..b {
                    let v = backend.element(0, i, j)?;
                    m[(i, j)] = v;
                    m[(j, i)] = v.conj();
                }
            }
        }
        return Ok(m);
    }
    if real_references {
        for i in 0..b {
            for j in i..b {
                let v = backend.element(step, i, j)?;
                m[(i, j)] = v;
                if j != i {
                    m[(j, i)] = v;
                }
            }
        }
    } else {
        for i in 0..b {
            for j in 0..b {
                m[(i, j)] = backend.element(step, i, j)?;
            }
        }
    }
    Ok(m)
}

/// Assemble S and T of dimension B(K+1) from blocks 0..=K+1.
///
/// Block (row l, column k) of S is A^(k-l), conjugate transposed when
/// k < l; block (l, k) of T is A^(k-l+1) with the same rule, the k = l-1
/// subdiagonal falling back on the Hermitian-extended A^(0).
pub fn assemble(cache: &ElementCache, iteration: usize) -> Result<KrylovMatrices, KrylovError> {
    let b = cache.block_size();
    let dim = b * (iteration + 1);
    let mut s = DenseMatrix::zeros(dim, dim);
    let mut t = DenseMatrix::zeros(dim, dim);
    for l in 0..=iteration {
        for k in 0..=iteration {
            let ds = k as isize - l as isize;
            copy_block(&mut s, cache, l, k, ds)?;
            copy_block(&mut t, cache, l, k, ds + 1)?;
        }
    }
    if !s.is_finite() || !t.is_finite() {
        return Err(KrylovError::NonFiniteMatrix);
    }
    Ok(KrylovMatrices { t, s })
}

fn copy_block(
    dst: &mut DenseMatrix,
    cache: &ElementCache,
    block_row: usize,
    block_col: usize,
    step: isize,
) -> Result<(), KrylovError> {
    let b = cache.block_size();
    let (src, conj_transpose) = if step >= 0 {
        (cache.block(step as usize)?, false)
    } else {
        (cache.block((-step) as usize)?, true)
    };
    for i in 0..b {
        for j in 0..b {
            let v = if conj_transpose {
                src[(j, i)].conj()
            } else {
                src[(i, j)]
            };
            dst[(block_row * b + i, block_col * b + j)] = v;
        }
    }
    Ok(())
}

/// One eigenvalue of the reduced problem mapped back to a physical energy.
#[derive(Debug, Clone, Copy)]
pub struct ExtractedLevel {
    pub lambda: Complex64,
    /// De-normalized energy in Hartree; meaningless when `spurious`.
    pub energy: f64,
    /// Eigenvalues far off the unit circle carry no physical phase.
    pub spurious: bool,
}

/// Threshold on | |λ| - 1 | beyond which an eigenvalue is flagged spurious.
/// Loose enough to keep physical phases under heavy element noise.
pub const SPURIOUS_MODULUS_TOL: f64 = 0.5;

/// Map propagator eigenvalues to energies, E = -arg(λ)/τ rescaled, with
/// arg taken in [-π, π). Non-spurious levels come first, sorted ascending.
pub fn extract_energies(
    lambdas: &[Complex64],
    tau: f64,
    record: NormalizationRecord,
) -> Vec<ExtractedLevel> {
    let mut levels: Vec<ExtractedLevel> = lambdas
        .iter()
        .map(|&lam| {
            let spurious = (lam.norm() - 1.0).abs() > SPURIOUS_MODULUS_TOL;
            let mut angle = lam.arg();
            if angle == core::f64::consts::PI {
                angle = -core::f64::consts::PI;
            }
            ExtractedLevel {
                lambda: lam,
                energy: record.denormalize(-angle / tau),
                spurious,
            }
        })
        .collect();
    levels.sort_by(|a, b| {
        (a.spurious, a.energy)
            .partial_cmp(&(b.spurious, b.energy))
            .expect("finite energies")
    });
    levels
}

/// A level recorded at its first convergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenLevel {
    pub energy: f64,
    pub multiplicity: usize,
}

/// One clustered level of a single iteration.
#[derive(Debug, Clone, Copy)]
pub struct LevelRow {
    pub energy: f64,
    pub lambda: Complex64,
    pub multiplicity: usize,
    pub converged: bool,
}

/// Result of one Krylov iteration.
#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    pub iteration: usize,
    /// Raw reduced-problem eigenvalues, unfiltered.
    pub raw_lambdas: Vec<Complex64>,
    /// Non-spurious levels sorted ascending by energy.
    pub levels: Vec<LevelRow>,
    pub n_spurious: usize,
    /// Frozen levels after this iteration, in freeze order.
    pub frozen: Vec<FrozenLevel>,
    pub regularization: Option<RegularizationReport>,
    /// Set when regularization or the eigensolver failed this iteration.
    pub solver_error: Option<String>,
    /// Cumulative distinct element evaluations after this iteration.
    pub elements_evaluated: u64,
}

/// Clusters energies, matches them across iterations by nearest energy, and
/// freezes (energy, multiplicity) at first convergence.
#[derive(Debug, Clone)]
pub struct ConvergenceTracker {
    cluster_tol: f64,
    per_state_tol: f64,
    n_target: usize,
    previous: Option<Vec<(f64, usize)>>,
    frozen: Vec<FrozenLevel>,
}

impl ConvergenceTracker {
    pub fn new(cluster_tol: f64, per_state_tol: f64, n_target: usize) -> Self {
        Self {
            cluster_tol,
            per_state_tol,
            n_target,
            previous: None,
            frozen: Vec::new(),
        }
    }

    pub fn frozen(&self) -> &[FrozenLevel] {
        &self.frozen
    }

    pub fn done(&self) -> bool {
        self.frozen.len() >= self.n_target
    }

    /// Ingest one iteration's sorted non-spurious levels; returns the
    /// clustered rows with convergence flags.
    pub fn step(&mut self, levels: &[ExtractedLevel]) -> Vec<LevelRow> {
        let clusters = cluster_sorted(levels, self.cluster_tol);
        let mut rows: Vec<LevelRow> = Vec::with_capacity(levels.len());
        let mut distinct: Vec<(f64, usize)> = Vec::with_capacity(clusters.len());
        for c in &clusters {
            let energy = c.energy;
            let mult = c.members.len();
            distinct.push((energy, mult));
            let already_frozen = self
                .frozen
                .iter()
                .any(|f| (f.energy - energy).abs() <= self.cluster_tol);
            let converged_now = match &self.previous {
                Some(prev) if !prev.is_empty() => {
                    let nearest = nearest_energy(prev, energy);
                    (nearest - energy).abs() <= self.per_state_tol
                }
                _ => false,
            };
            if converged_now && !already_frozen {
                self.frozen.push(FrozenLevel {
                    energy,
                    multiplicity: mult,
                });
            }
            let converged = converged_now || already_frozen;
            for &idx in &c.members {
                rows.push(LevelRow {
                    energy: levels[idx].energy,
                    lambda: levels[idx].lambda,
                    multiplicity: mult,
                    converged,
                });
            }
        }
        self.previous = Some(distinct);
        rows
    }
}

struct Cluster {
    energy: f64,
    members: Vec<usize>,
}

/// Chain-cluster sorted levels: a level joins the current cluster when it
/// is within the tolerance of the cluster's last member.
fn cluster_sorted(levels: &[ExtractedLevel], tol: f64) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut last_energy = f64::NEG_INFINITY;
    for (i, level) in levels.iter().enumerate() {
        if level.spurious {
            continue;
        }
        match clusters.last_mut() {
            Some(c) if (level.energy - last_energy) <= tol => {
                c.members.push(i);
            }
            _ => clusters.push(Cluster {
                energy: 0.0,
                members: alloc::vec![i],
            }),
        }
        last_energy = level.energy;
    }
    for c in clusters.iter_mut() {
        let sum: f64 = c.members.iter().map(|&i| levels[i].energy).sum();
        c.energy = sum / c.members.len() as f64;
    }
    clusters
}

/// Nearest previous energy; ties break toward the lower energy.
fn nearest_energy(prev: &[(f64, usize)], energy: f64) -> f64 {
    let mut best = prev[0].0;
    let mut best_diff = (best - energy).abs();
    for &(e, _) in &prev[1..] {
        let d = (e - energy).abs();
        if d < best_diff || (d == best_diff && e < best) {
            best = e;
            best_diff = d;
        }
    }
    best
}

/// Everything a finished run produced.
#[derive(Debug, Clone)]
pub struct QbkspRun {
    pub estimates: Vec<SpectrumEstimate>,
    pub normalization: NormalizationRecord,
    /// Whether the real-reference measurement reduction was active.
    pub real_references: bool,
    pub orthogonal_references: bool,
    /// Total distinct element evaluations, matching the closed-form count.
    pub elements_evaluated: u64,
    pub frozen: Vec<FrozenLevel>,
}

/// Run QBKSP end to end, normalizing and (for the exact and rounded
/// models) diagonalizing the Hamiltonian internally.
pub fn run_qbksp(ham: &PauliHamiltonian, config: &QbkspConfig) -> Result<QbkspRun, KrylovError> {
    config.validate()?;
    let needs_propagator = !matches!(config.model, MeasurementModel::Shots(_));
    let needs_spectrum = needs_propagator || config.normalization == NormalizationMode::Spectral;

    let dense_spectrum = if needs_spectrum {
        Some(eigh(&ham.to_dense()).map_err(KrylovError::Linalg)?)
    } else {
        None
    };

    let (ham_norm, record) = match config.normalization {
        NormalizationMode::CoefficientNorm => ham.normalized().map_err(KrylovError::Pauli)?,
        NormalizationMode::Spectral => {
            let (vals, _) = dense_spectrum.as_ref().expect("spectrum computed above");
            let (e_min, e_max) = (vals[0], vals[vals.len() - 1]);
            ham.normalized_to_bounds(e_min, e_max)
                .map_err(KrylovError::Pauli)?
        }
    };

    let propagator = if needs_propagator {
        let (vals, vecs) = dense_spectrum.expect("spectrum computed above");
        let normalized_vals: Vec<f64> = vals.iter().map(|&v| record.normalize(v)).collect();
        Some(
            ExactPropagator::from_parts(normalized_vals, vecs, record, ham.n_qubits())
                .map_err(KrylovError::State)?,
        )
    } else {
        None
    };

    run_qbksp_prepared(&ham_norm, record, propagator.as_ref(), config)
}

/// Run QBKSP against an already-normalized Hamiltonian, reusing a prepared
/// propagator (required for the exact and rounded models).
pub fn run_qbksp_prepared(
    ham_normalized: &PauliHamiltonian,
    record: NormalizationRecord,
    propagator: Option<&ExactPropagator>,
    config: &QbkspConfig,
) -> Result<QbkspRun, KrylovError> {
    config.validate()?;
    let b = config.references.len();
    if config.references[0].n_qubits() != ham_normalized.n_qubits() {
        return Err(KrylovError::Config(
            "reference qubit count does not match the Hamiltonian",
        ));
    }

    let real_references =
        ham_normalized.is_real_matrix() && config.references.iter().all(|r| r.is_real());
    let backend = MeasurementBackend::new(
        config.model,
        ham_normalized,
        propagator,
        &config.references,
        config.tau,
    )?;

    let mut cache = ElementCache::new(b, config.tau);
    let mut tracker = ConvergenceTracker::new(
        config.degeneracy_cluster_tol,
        config.per_state_tolerance,
        config.n_target,
    );
    let mut estimates: Vec<SpectrumEstimate> = Vec::with_capacity(config.k_max + 1);

    for k in 0..=config.k_max {
        while cache.max_step().is_none_or(|m| m < k + 1) {
            let step = cache.max_step().map_or(0, |m| m + 1);
            let block = evaluate_block(
                &backend,
                b,
                step,
                real_references,
                config.orthogonal_references,
            )?;
            cache.push(block);
        }
        debug_assert_eq!(
            backend.elements_evaluated(),
            count_matrix_elements(
                b as u64,
                k as u64,
                real_references,
                config.orthogonal_references
            )
        );

        let mut estimate = SpectrumEstimate {
            iteration: k,
            raw_lambdas: Vec::new(),
            levels: Vec::new(),
            n_spurious: 0,
            frozen: tracker.frozen().to_vec(),
            regularization: None,
            solver_error: None,
            elements_evaluated: backend.elements_evaluated(),
        };

        let matrices = assemble(&cache, k)?;
        let solved: Result<(Vec<Complex64>, RegularizationReport), RegularizeError> =
            regularize(&matrices.t, &matrices.s, config.sigma).and_then(
                |(t_red, s_red, report)| {
                    solve_reduced(&t_red, &s_red).map(|lambdas| (lambdas, report))
                },
            );
        match solved {
            Ok((lambdas, report)) => {
                let levels = extract_energies(&lambdas, config.tau, record);
                estimate.n_spurious = levels.iter().filter(|l| l.spurious).count();
                estimate.raw_lambdas = lambdas;
                estimate.regularization = Some(report);
                estimate.levels = tracker.step(&levels);
                estimate.frozen = tracker.frozen().to_vec();
            }
            Err(err) => {
                estimate.solver_error = Some(err.to_string());
            }
        }
        estimates.push(estimate);
        if tracker.done() {
            break;
        }
    }

    Ok(QbkspRun {
        estimates,
        normalization: record,
        real_references,
        orthogonal_references: config.orthogonal_references,
        elements_evaluated: backend.elements_evaluated(),
        frozen: tracker.frozen().to_vec(),
    })
}

/// Errors from the Krylov driver.
#[derive(Debug, Clone, PartialEq)]
pub enum KrylovError {
    Config(&'static str),
    MissingBlock { step: usize },
    NonFiniteMatrix,
    Backend {
        step: usize,
        row: usize,
        col: usize,
        message: String,
    },
    Pauli(PauliError),
    State(StateError),
    Expectation(ExpectationError),
    Regularize(RegularizeError),
    Linalg(LinalgError),
}

impl fmt::Display for KrylovError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KrylovError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            KrylovError::MissingBlock { step } => {
                write!(f, "element cache is missing block {step}")
            }
            KrylovError::NonFiniteMatrix => write!(f, "assembled matrices contain NaN or Inf"),
            KrylovError::Backend {
                step,
                row,
                col,
                message,
            } => write!(f, "element ({row},{col}) at step {step} failed: {message}"),
            KrylovError::Pauli(e) => write!(f, "{e}"),
            KrylovError::State(e) => write!(f, "{e}"),
            KrylovError::Expectation(e) => write!(f, "{e}"),
            KrylovError::Regularize(e) => write!(f, "{e}"),
            KrylovError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for KrylovError {}
