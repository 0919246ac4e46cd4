//! Machine-readable outputs. Floats are written with a fixed format so the
//! same config and seed always produce byte-identical files.

use anyhow::{Context, Result};
use qbksp_core::krylov::QbkspRun;
use std::io::Write;
use std::path::Path;

use crate::runner::Summary;

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let f = std::fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    Ok(std::io::BufWriter::new(f))
}

/// Per-iteration eigenvalue table. One row per retained eigenvalue.
pub fn write_iterations(path: &Path, run: &QbkspRun) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# energies in Hartree, time step in atomic time units")?;
    writeln!(
        w,
        "iteration,circuits_total,index,energy_hartree,lambda_modulus,converged,multiplicity"
    )?;
    for est in &run.estimates {
        let circuits = 2 * est.elements_evaluated;
        if let Some(err) = &est.solver_error {
            writeln!(w, "# iteration {} failed: {}", est.iteration, err)?;
            continue;
        }
        for (idx, level) in est.levels.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{:.12e},{:.12e},{},{}",
                est.iteration,
                circuits,
                idx,
                level.energy,
                level.lambda.norm(),
                u8::from(level.converged),
                level.multiplicity
            )?;
        }
    }
    Ok(())
}

/// Per-iteration truncation report.
pub fn write_regularization(path: &Path, run: &QbkspRun) -> Result<()> {
    let mut w = create(path)?;
    writeln!(
        w,
        "iteration,dimension,retained,sigma,smallest_retained,largest_discarded"
    )?;
    for est in &run.estimates {
        if let Some(rep) = &est.regularization {
            writeln!(
                w,
                "{},{},{},{:.6e},{},{}",
                est.iteration,
                rep.singular_values.len(),
                rep.retained,
                rep.sigma,
                rep.smallest_retained()
                    .map_or_else(|| "nan".into(), |v| format!("{v:.6e}")),
                rep.largest_discarded()
                    .map_or_else(|| "nan".into(), |v| format!("{v:.6e}")),
            )?;
        }
    }
    Ok(())
}

pub fn write_summary(path: &Path, s: &Summary) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "seed = {}", s.seed)?;
    writeln!(w, "distinct_frozen = {}", s.distinct_frozen)?;
    match (s.accurate_distinct, s.accurate_degeneracies) {
        (Some(d), Some(g)) => {
            writeln!(w, "distinct_within_chemical_accuracy = {d}")?;
            writeln!(w, "degeneracies_within_chemical_accuracy = {g}")?;
        }
        _ => {
            writeln!(w, "# no dense oracle available; accuracy rows omitted")?;
        }
    }
    writeln!(w, "total_elements = {}", s.total_elements)?;
    writeln!(w, "total_circuits = {}", s.total_circuits)?;
    writeln!(w, "sigma = {:.6e}", s.sigma)?;
    writeln!(w, "normalization_scale = {:.12e}", s.scale)?;
    writeln!(w, "normalization_shift = {:.12e}", s.shift)?;
    writeln!(w, "real_references = {}", s.real_references)?;
    writeln!(w, "boundary_conditions = open-chain")?;
    for (i, f) in s.frozen.iter().enumerate() {
        writeln!(
            w,
            "frozen_{i} = {:.12e} multiplicity {}",
            f.energy, f.multiplicity
        )?;
    }
    Ok(())
}

/// Dense spectrum with multiplicities; values closer than the clustering
/// tolerance merge into one row.
pub fn write_oracle(path: &Path, values: &[f64]) -> Result<()> {
    const ORACLE_CLUSTER_TOL: f64 = 1e-8;
    let mut w = create(path)?;
    writeln!(w, "# energies in Hartree")?;
    writeln!(w, "energy_hartree,multiplicity")?;
    let mut i = 0usize;
    while i < values.len() {
        let mut j = i + 1;
        while j < values.len() && values[j] - values[j - 1] <= ORACLE_CLUSTER_TOL {
            j += 1;
        }
        let mean: f64 = values[i..j].iter().sum::<f64>() / (j - i) as f64;
        writeln!(w, "{:.12e},{}", mean, j - i)?;
        i = j;
    }
    Ok(())
}
