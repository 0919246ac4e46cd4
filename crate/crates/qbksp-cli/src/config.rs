//! Run configuration: a flat TOML document, fully reproducible from the
//! file plus the seed.

use anyhow::{bail, Context, Result};
use qbksp_core::expectation::{CircuitVariant, MeasurementModel, ShotModel};
use qbksp_core::krylov::NormalizationMode;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// "heisenberg" or "file".
    pub model: String,
    /// Number of lattice sites (heisenberg model).
    pub n_sites: Option<usize>,
    /// Exchange couplings J_x, J_y, J_z in Hartree (heisenberg model).
    pub coupling: Option<[f64; 3]>,
    /// Path to a Pauli-term Hamiltonian file (file model).
    pub hamiltonian_file: Option<PathBuf>,

    /// Random references: overlap of state b with the b-th lowest oracle
    /// eigenstate. Mutually exclusive with `reference_files`.
    pub reference_overlaps: Option<Vec<f64>>,
    /// References loaded from statevector files.
    pub reference_files: Option<Vec<PathBuf>>,

    /// Time step in atomic time units.
    pub tau: f64,
    /// Maximum number of Krylov iterations.
    pub iterations: usize,

    /// "exact", "rounded" or "shots".
    pub measurement: String,
    /// Decimal digits kept per component (rounded model).
    pub precision: Option<u32>,
    /// Shots per circuit (shots model).
    pub shots: Option<u64>,
    /// Trotter step in atomic time units (shots model).
    pub trotter_step: Option<f64>,
    /// Hadamard-test circuit variant "a", "b" or "c" (shots model).
    pub circuit: Option<String>,

    /// Singular-value truncation threshold. Defaults by measurement model:
    /// 1e-10 exact, 10^(-precision-1) rounded, 0.1 shots.
    pub sigma: Option<f64>,
    /// Convergence threshold on consecutive-iteration energy changes, Hartree.
    pub per_state_tolerance: Option<f64>,
    /// Degeneracy clustering tolerance, Hartree.
    pub cluster_tolerance: Option<f64>,
    /// Stop after this many levels have frozen.
    pub n_target: usize,
    pub seed: u64,
    /// "coefficient" (1-norm rescaling) or "spectral" (exact range).
    pub normalization: Option<String>,
    /// Declare the references orthogonal (skips measuring initial overlaps).
    #[serde(default)]
    pub orthogonal_references: bool,
    /// Output directory.
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        match self.model.as_str() {
            "heisenberg" => {
                if self.n_sites.is_none() {
                    bail!("heisenberg model needs n_sites");
                }
                if self.hamiltonian_file.is_some() {
                    bail!("heisenberg model does not take hamiltonian_file");
                }
            }
            "file" => {
                if self.hamiltonian_file.is_none() {
                    bail!("file model needs hamiltonian_file");
                }
            }
            other => bail!("unknown model '{other}' (expected heisenberg or file)"),
        }
        match (&self.reference_overlaps, &self.reference_files) {
            (Some(o), None) => {
                if o.is_empty() {
                    bail!("reference_overlaps is empty");
                }
            }
            (None, Some(f)) => {
                if f.is_empty() {
                    bail!("reference_files is empty");
                }
            }
            (Some(_), Some(_)) => bail!("give either reference_overlaps or reference_files"),
            (None, None) => bail!("no references configured"),
        }
        match self.measurement.as_str() {
            "exact" => {}
            "rounded" => {
                if self.precision.is_none() {
                    bail!("rounded measurement needs precision");
                }
            }
            "shots" => {
                if self.shots.is_none() {
                    bail!("shots measurement needs shots");
                }
            }
            other => bail!("unknown measurement '{other}' (expected exact, rounded or shots)"),
        }
        Ok(())
    }

    pub fn measurement_model(&self) -> Result<MeasurementModel> {
        let model = match self.measurement.as_str() {
            "exact" => MeasurementModel::Exact,
            "rounded" => MeasurementModel::Rounded {
                digits: self.precision.expect("checked"),
            },
            "shots" => {
                let variant = match self.circuit.as_deref().unwrap_or("b") {
                    "a" | "A" => CircuitVariant::A,
                    "b" | "B" => CircuitVariant::B,
                    "c" | "C" => CircuitVariant::C,
                    other => bail!("unknown circuit variant '{other}'"),
                };
                MeasurementModel::Shots(ShotModel {
                    n_shots: self.shots.expect("checked"),
                    trotter_dt: self.trotter_step.unwrap_or(0.07),
                    variant,
                    seed: self.seed,
                })
            }
            _ => unreachable!("validated in check"),
        };
        Ok(model)
    }

    /// The truncation threshold, defaulted per measurement model.
    pub fn effective_sigma(&self) -> f64 {
        if let Some(s) = self.sigma {
            return s;
        }
        match self.measurement.as_str() {
            "rounded" => 10f64.powi(-(self.precision.unwrap_or(3) as i32) - 1),
            "shots" => 0.1,
            _ => 1e-10,
        }
    }

    pub fn normalization_mode(&self) -> Result<NormalizationMode> {
        match self.normalization.as_deref().unwrap_or("coefficient") {
            "coefficient" => Ok(NormalizationMode::CoefficientNorm),
            "spectral" => Ok(NormalizationMode::Spectral),
            other => bail!("unknown normalization '{other}' (expected coefficient or spectral)"),
        }
    }
}
