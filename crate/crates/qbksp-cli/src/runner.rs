//! Experiment execution: build the model, run the solver, write outputs.

use anyhow::{bail, Context, Result};
use qbksp_core::expectation::MeasurementModel;
use qbksp_core::krylov::{
    run_qbksp_prepared, FrozenLevel, NormalizationMode, QbkspConfig, QbkspRun,
};
use qbksp_core::linalg::eigh;
use qbksp_core::pauli::{NormalizationRecord, PauliHamiltonian};
use qbksp_core::reference::build_block;
use qbksp_core::statevector::{ExactPropagator, Statevector};
use qbksp_core::CHEMICAL_ACCURACY;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

use crate::config::RunConfig;
use crate::output;

/// Dense diagonalization above this qubit count is refused.
pub const MAX_DENSE_QUBITS: usize = 14;

pub struct Prepared {
    pub ham_norm: PauliHamiltonian,
    pub record: NormalizationRecord,
    pub propagator: Option<ExactPropagator>,
    /// Physical spectrum, ascending, when a dense diagonalization ran.
    pub oracle: Option<Vec<f64>>,
    pub references: Vec<Statevector>,
}

pub fn load_hamiltonian(cfg: &RunConfig) -> Result<PauliHamiltonian> {
    match cfg.model.as_str() {
        "heisenberg" => {
            let n = cfg.n_sites.expect("validated");
            let coupling = cfg.coupling.unwrap_or([1.0, 1.0, 1.0]);
            Ok(PauliHamiltonian::heisenberg_chain(n, coupling)?)
        }
        "file" => {
            let path = cfg.hamiltonian_file.as_ref().expect("validated");
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read Hamiltonian {}", path.display()))?;
            PauliHamiltonian::parse(&text)
                .with_context(|| format!("cannot parse Hamiltonian {}", path.display()))
        }
        _ => unreachable!(),
    }
}

/// Normalize, diagonalize where required, and construct the reference block.
pub fn prepare(cfg: &RunConfig, seed: u64) -> Result<Prepared> {
    let ham = load_hamiltonian(cfg)?;
    let model = cfg.measurement_model()?;
    let norm_mode = cfg.normalization_mode()?;

    let needs_propagator = !matches!(model, MeasurementModel::Shots(_));
    let needs_oracle_states = cfg.reference_overlaps.is_some();
    let needs_dense = needs_propagator || needs_oracle_states
        || norm_mode == NormalizationMode::Spectral;

    if needs_dense && ham.n_qubits() > MAX_DENSE_QUBITS {
        bail!(
            "{} qubits exceeds the dense-diagonalization limit of {MAX_DENSE_QUBITS}; \
             use the shots model with file references for larger systems",
            ham.n_qubits()
        );
    }

    let dense = if needs_dense {
        Some(eigh(&ham.to_dense())?)
    } else {
        None
    };

    let (ham_norm, record) = match norm_mode {
        NormalizationMode::CoefficientNorm => ham.normalized()?,
        NormalizationMode::Spectral => {
            let (vals, _) = dense.as_ref().expect("dense spectrum required");
            ham.normalized_to_bounds(vals[0], *vals.last().unwrap())?
        }
    };

    let (propagator, oracle) = match dense {
        Some((vals, vecs)) => {
            let norm_vals: Vec<f64> = vals.iter().map(|&v| record.normalize(v)).collect();
            let prop = ExactPropagator::from_parts(norm_vals, vecs, record, ham.n_qubits())?;
            (Some(prop), Some(vals))
        }
        None => (None, None),
    };

    let references = match (&cfg.reference_overlaps, &cfg.reference_files) {
        (Some(overlaps), None) => {
            let prop = propagator
                .as_ref()
                .expect("overlap references require the dense spectrum");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let real_mode = ham.is_real_matrix();
            build_block(overlaps, prop, real_mode, &mut rng)?.states
        }
        (None, Some(files)) => {
            let mut states = Vec::with_capacity(files.len());
            for path in files {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read reference {}", path.display()))?;
                let (state, deviation) = Statevector::parse_text(&text)
                    .with_context(|| format!("cannot parse reference {}", path.display()))?;
                if deviation > 1e-6 {
                    eprintln!(
                        "warning: reference {} had norm deviation {deviation:.3e}; renormalized",
                        path.display()
                    );
                }
                states.push(state);
            }
            states
        }
        _ => unreachable!("validated"),
    };

    Ok(Prepared {
        ham_norm,
        record,
        propagator,
        oracle,
        references,
    })
}

pub struct RunArtifacts {
    pub run: QbkspRun,
    pub summary: Summary,
}

pub struct Summary {
    pub distinct_frozen: usize,
    pub accurate_distinct: Option<usize>,
    pub accurate_degeneracies: Option<usize>,
    pub total_elements: u64,
    pub total_circuits: u64,
    pub frozen: Vec<FrozenLevel>,
    pub scale: f64,
    pub shift: f64,
    pub real_references: bool,
    pub sigma: f64,
    pub seed: u64,
}

/// Execute a run and write `iterations.csv`, `regularization.csv` and
/// `summary.txt` into the output directory.
pub fn execute(cfg: &RunConfig, seed: u64, out_dir: &Path) -> Result<RunArtifacts> {
    let mut effective = cfg.clone();
    effective.seed = seed;
    let prepared = prepare(&effective, seed)?;
    let solver_cfg = QbkspConfig {
        references: prepared.references.clone(),
        tau: cfg.tau,
        k_max: cfg.iterations,
        model: effective.measurement_model()?,
        sigma: cfg.effective_sigma(),
        per_state_tolerance: cfg.per_state_tolerance.unwrap_or(1e-4),
        degeneracy_cluster_tol: cfg.cluster_tolerance.unwrap_or(CHEMICAL_ACCURACY),
        n_target: cfg.n_target,
        orthogonal_references: cfg.orthogonal_references,
        normalization: cfg.normalization_mode()?,
    };
    let run = run_qbksp_prepared(
        &prepared.ham_norm,
        prepared.record,
        prepared.propagator.as_ref(),
        &solver_cfg,
    )?;

    let (accurate_distinct, accurate_degeneracies) = match &prepared.oracle {
        Some(oracle) => {
            let accurate: Vec<&FrozenLevel> = run
                .frozen
                .iter()
                .filter(|f| {
                    oracle
                        .iter()
                        .map(|o| (o - f.energy).abs())
                        .fold(f64::INFINITY, f64::min)
                        <= CHEMICAL_ACCURACY
                })
                .collect();
            let ndeg = accurate.iter().filter(|f| f.multiplicity >= 2).count();
            (Some(accurate.len()), Some(ndeg))
        }
        None => (None, None),
    };

    let summary = Summary {
        distinct_frozen: run.frozen.len(),
        accurate_distinct,
        accurate_degeneracies,
        total_elements: run.elements_evaluated,
        total_circuits: 2 * run.elements_evaluated,
        frozen: run.frozen.clone(),
        scale: prepared.record.scale,
        shift: prepared.record.shift,
        real_references: run.real_references,
        sigma: solver_cfg.sigma,
        seed,
    };

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output dir {}", out_dir.display()))?;
    output::write_iterations(&out_dir.join("iterations.csv"), &run)?;
    output::write_regularization(&out_dir.join("regularization.csv"), &run)?;
    output::write_summary(&out_dir.join("summary.txt"), &summary)?;

    Ok(RunArtifacts { run, summary })
}

/// Write the full dense spectrum with multiplicities.
pub fn oracle(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let ham = load_hamiltonian(cfg)?;
    if ham.n_qubits() > MAX_DENSE_QUBITS {
        bail!(
            "{} qubits exceeds the dense-diagonalization limit of {MAX_DENSE_QUBITS} \
             for the oracle spectrum",
            ham.n_qubits()
        );
    }
    let (vals, _) = eigh(&ham.to_dense())?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output dir {}", out_dir.display()))?;
    output::write_oracle(&out_dir.join("oracle.csv"), &vals)?;
    Ok(())
}
