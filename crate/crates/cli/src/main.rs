use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qps_cli::config::{parse_params, Command, Format, PartialConfig};
use qps_cli::error::CliError;

/// Quantum-phase synchronization experiments.
#[derive(Debug, Parser)]
#[command(name = "qps", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON file with configuration fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long)]
    eps_phase: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Circuit angles `a,b,g,m1,m2,n1,n2,s1` in radians.
    #[arg(long, allow_hyphen_values = true)]
    params: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    minimize: bool,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    step0: Option<f64>,
    #[arg(long)]
    bins_phase: Option<usize>,
    #[arg(long)]
    bins_psf: Option<usize>,
    /// Emit one row per sample instead of histograms.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    theta_points: Option<usize>,
    #[arg(long)]
    dphi_points: Option<usize>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    r2: Option<f64>,
    /// Witness grid points per angle.
    #[arg(long)]
    resolution: Option<usize>,
}

impl Args {
    fn into_partial(self) -> Result<(Option<PathBuf>, PartialConfig), CliError> {
        let params = self.params.as_deref().map(parse_params).transpose().map_err(CliError::InvalidInput)?;
        let flag = |b: bool| b.then_some(true);
        let partial = PartialConfig {
            command: Some(self.command),
            seed: self.seed,
            n_samples: self.samples,
            quad_order: self.quad_order,
            eps_phase: self.eps_phase,
            params,
            output_path: self.out,
            format: self.format,
            workers: self.workers,
            restarts: self.restarts,
            minimize: flag(self.minimize),
            max_iter: self.max_iter,
            grad_tol: self.grad_tol,
            step0: self.step0,
            bins_phase: self.bins_phase,
            bins_psf: self.bins_psf,
            raw: flag(self.raw),
            theta_points: self.theta_points,
            dphi_points: self.dphi_points,
            r1: self.r1,
            r2: self.r2,
            resolution: self.resolution,
        };
        Ok((self.config, partial))
    }
}

fn main_inner(args: Args) -> Result<(), CliError> {
    let (file, cli) = args.into_partial()?;
    let base = match file {
        Some(path) => PartialConfig::from_file(&path)?,
        None => PartialConfig::default(),
    };
    let cfg = base.overlaid(cli).resolve()?;
    qps_cli::run(&cfg).map(|_| ())
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qps: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
