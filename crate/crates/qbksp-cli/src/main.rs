//! Command-line experiment runner for the QBKSP eigensolver.

mod config;
mod output;
mod runner;

use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qbksp", about = "Block Krylov subspace projector eigensolver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a QBKSP run described by a TOML config file.
    Run {
        /// Path to the run configuration.
        config: PathBuf,
        /// Override the config's random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the exact dense spectrum of the configured Hamiltonian.
    Oracle {
        /// Path to the run configuration.
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            output,
        } => {
            let cfg = config::RunConfig::load(&config)?;
            let seed = seed.unwrap_or(cfg.seed);
            let out_dir = output
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            let artifacts = runner::execute(&cfg, seed, &out_dir)?;
            let s = &artifacts.summary;
            println!(
                "run finished: {} iterations, {} frozen levels, {} elements ({} circuits); \
                 outputs in {}",
                artifacts.run.estimates.len(),
                s.distinct_frozen,
                s.total_elements,
                s.total_circuits,
                out_dir.display()
            );
            if let (Some(d), Some(g)) = (s.accurate_distinct, s.accurate_degeneracies) {
                println!(
                    "within chemical accuracy: {d} distinct eigenvalues, {g} degeneracies"
                );
            }
            Ok(())
        }
        Command::Oracle { config, output } => {
            let cfg = config::RunConfig::load(&config)?;
            let out_dir = output
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            runner::oracle(&cfg, &out_dir)?;
            println!("oracle spectrum written to {}", out_dir.display());
            Ok(())
        }
    }
}
