//! Experiment harness for quantum-phase synchronization: resolves a
//! configuration, runs one command and writes a self-describing table.

pub mod config;
pub mod error;
pub mod experiments;
pub mod table;
pub mod verify;

use config::{Command, ExperimentConfig};
use error::{invalid, CliError, Result};
use table::{Cell, Table};

/// A finished run. `failures` counts failed checks or missing witnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub failures: usize,
}

/// Computes the result table with the resolved configuration as header,
/// without writing anything.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (body, failures) = match cfg.command {
        Command::Optimize => (experiments::run_optimize(cfg)?, 0),
        Command::MeanPsf => (experiments::run_mean_psf(cfg)?, 0),
        Command::Distributions => (experiments::run_distributions(cfg)?, 0),
        Command::LatitudeSweep => (experiments::run_latitude_sweep(cfg)?, 0),
        Command::ConcurrenceScan => (experiments::run_concurrence_scan(cfg)?, 0),
        Command::Witness => experiments::run_witness(cfg)?,
        Command::Verify => verify_table(cfg)?,
    };
    let mut table = Table { metadata: cfg.header_fields(), ..body.clone() };
    table.metadata.extend(body.metadata);
    Ok(Outcome { table, failures })
}

fn verify_table(cfg: &ExperimentConfig) -> Result<(Table, usize)> {
    let results = verify::run_suite(&verify::VerifyContext::from_config(cfg))?;
    let mut t = Table::new(&["check", "statistic", "comparison", "threshold", "passed"]);
    for r in &results {
        t.push(vec![
            Cell::text(r.name.clone()),
            Cell::num(r.statistic),
            Cell::text(r.comparison.symbol()),
            Cell::num(r.threshold),
            Cell::text(r.passed.to_string()),
        ]);
    }
    let failures = results.iter().filter(|r| !r.passed).count();
    t.meta("failed_checks", failures.to_string());
    Ok((t, failures))
}

/// Executes on `cfg.workers` threads (if set), writes the table, and turns
/// failed checks into [`CliError::ChecksFailed`] after writing.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let outcome = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| invalid(format!("cannot start {n} workers: {e}")))?
            .install(|| execute(cfg))?,
        None => execute(cfg)?,
    };
    outcome.table.write(cfg.output_path.as_deref(), cfg.format)?;
    if outcome.failures > 0 {
        return Err(CliError::ChecksFailed(outcome.failures));
    }
    Ok(outcome)
}
