//! Acceptance run: twelve criteria, one PASS/FAIL line each.
//!
//! Every criterion also has a wall-clock budget; exceeding it fails the
//! criterion. Exits nonzero if anything fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use qps_cli::config::{Command, ExperimentConfig};
use qps_cli::experiments::{histograms, phase_shape};
use qps_cli::table::{Cell, Table};
use qps_cli::verify::{self, CheckResult, VerifyContext};
use qps_core::gates::{u_g, CircuitParams};

const SEED: u64 = 1;
const SAMPLES: u64 = 1_000_000;

fn context() -> VerifyContext {
    let mut cfg = ExperimentConfig::defaults(Command::Verify);
    cfg.seed = SEED;
    cfg.n_samples = SAMPLES;
    VerifyContext::from_config(&cfg)
}

struct Criterion {
    id: u8,
    title: &'static str,
    budget: Duration,
    run: fn() -> Result<Vec<CheckResult>, String>,
}

fn describe(r: &CheckResult) -> String {
    format!("{}={:.3e} ({} {:.1e})", r.name, r.statistic, r.comparison.symbol(), r.threshold)
}

fn core_err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn zero_mean_core() -> Result<Vec<CheckResult>, String> {
    Ok(vec![verify::core_mean_vanishes(&context(), verify::ZERO_MEAN_CORES).map_err(core_err)?])
}

fn best_row(t: &Table) -> Result<(f64, [f64; 3], f64), String> {
    let col = |n: &str| t.column(n).ok_or(format!("missing column {n}"));
    let (kind, value) = (col("kind")?, col("value")?);
    let best = t.rows.iter().find(|r| r[kind] == Cell::text("best")).ok_or("no best row")?;
    let num = |c: usize| best[c].as_f64().ok_or("non-numeric cell".to_string());
    let residuals = [num(col("residual_alpha")?)?, num(col("residual_beta")?)?, num(col("residual_gamma")?)?];
    let mut peak = f64::NEG_INFINITY;
    for r in t.rows.iter().filter(|r| r[kind] == Cell::text("restart")) {
        if r[col("converged")?] == Cell::text("true") {
            peak = peak.max(r[value].as_f64().unwrap_or(f64::NEG_INFINITY).abs());
        }
    }
    Ok((num(value)?, residuals, peak))
}

fn optimal_value() -> Result<Vec<CheckResult>, String> {
    let mut out = Vec::new();
    for minimize in [false, true] {
        let mut cfg = ExperimentConfig::defaults(Command::Optimize);
        cfg.seed = SEED;
        cfg.minimize = minimize;
        let outcome = qps_cli::execute(&cfg).map_err(core_err)?;
        let (best, residuals, peak) = best_row(&outcome.table)?;
        let tag = if minimize { "min" } else { "max" };
        let target = if minimize { -0.349 } else { 0.349 };
        let worst_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        out.push(CheckResult::at_most(format!("{tag}_offset"), (best - target).abs(), 0.002));
        out.push(CheckResult::at_most(format!("{tag}_angle_residual"), worst_residual, 0.02));
        out.push(CheckResult::at_most(format!("{tag}_converged_peak"), peak, 0.352));
    }
    Ok(out)
}

fn gradient() -> Result<Vec<CheckResult>, String> {
    let mut r = verify::stationary_points(&context()).map_err(core_err)?;
    r.truncate(2);
    Ok(r)
}

fn equatorial() -> Result<Vec<CheckResult>, String> {
    Ok(vec![verify::equatorial_sync(&context(), verify::ORACLE_DRAWS).map_err(core_err)?])
}

fn concurrence() -> Result<Vec<CheckResult>, String> {
    Ok(vec![verify::concurrence_encoding(&context(), verify::PAIR_DRAWS).map_err(core_err)?])
}

fn blank_sync() -> Result<Vec<CheckResult>, String> {
    verify::blank_sync(&context(), verify::PAIR_DRAWS).map_err(core_err)
}

fn oracles() -> Result<Vec<CheckResult>, String> {
    let ctx = context();
    Ok(vec![
        verify::core_closed_form(&ctx, verify::ORACLE_DRAWS).map_err(core_err)?,
        verify::proof_state_catalog_check(&ctx, verify::ORACLE_DRAWS).map_err(core_err)?,
        verify::local_expansions(&ctx, verify::ORACLE_DRAWS).map_err(core_err)?,
    ])
}

fn witness() -> Result<Vec<CheckResult>, String> {
    Ok(vec![verify::witness_search(&context(), verify::WITNESS_CIRCUITS).map_err(core_err)?])
}

fn undefined_fraction() -> Result<Vec<CheckResult>, String> {
    verify::undefined_fractions(&context(), verify::RANDOM_CIRCUITS).map_err(core_err)
}

/// Uses the raw minimum-density bin, not the smoothed locator of the verify
/// suite.
fn phase_distribution() -> Result<Vec<CheckResult>, String> {
    let ctx = context();
    let h = histograms(&u_g(&CircuitParams::u_max()), SAMPLES, SEED, ctx.eps, 180, 100).map_err(core_err)?;
    let defined = (SAMPLES - h.undefined) as f64;
    let density: Vec<f64> = h.phase.iter().map(|&c| c as f64 / defined).collect();
    let s = phase_shape(&density);
    let in_band = |c: f64, lo: f64, hi: f64| if c > lo && c < hi { 0.0 } else { 1.0 };
    Ok(vec![
        CheckResult::at_most("asymmetry", s.asymmetry, 0.02),
        CheckResult::at_most("min_bin_offset_from_pi", PI - s.min_center.abs(), 10f64.to_radians()),
        CheckResult::at_most("max_outside_(pi/4,3pi/4)", in_band(s.max_center_positive, PI / 4.0, 3.0 * PI / 4.0), 0.0),
        CheckResult::at_most("max_outside_(-3pi/4,-pi/4)", in_band(s.max_center_negative, -3.0 * PI / 4.0, -PI / 4.0), 0.0),
    ])
}

fn latitude() -> Result<Vec<CheckResult>, String> {
    let r = verify::latitude_sweep(&context(), 33, 64).map_err(core_err)?;
    Ok(r.into_iter().filter(|c| c.name != "latitude_equator_row_mixed").collect())
}

fn run_cli(args: &[&str], workers: usize, out: &Path) -> Result<Vec<u8>, String> {
    let status = Process::new(env!("CARGO_BIN_EXE_qps"))
        .args(args)
        .args(["--seed", "7", "--workers", &workers.to_string(), "--out"])
        .arg(out)
        .status()
        .map_err(core_err)?;
    if !status.success() {
        return Err(format!("qps {args:?} exited with {status}"));
    }
    std::fs::read(out).map_err(core_err)
}

fn determinism() -> Result<Vec<CheckResult>, String> {
    let dir = tempfile::tempdir().map_err(core_err)?;
    let commands: [&[&str]; 8] = [
        &["mean-psf"],
        &["distributions"],
        &["distributions", "--raw", "--samples", "50000", "--format", "json"],
        &["latitude-sweep"],
        &["concurrence-scan"],
        &["witness"],
        &["optimize", "--restarts", "3", "--max-iter", "60"],
        &["verify"],
    ];
    let mut differing = 0;
    for (k, args) in commands.iter().enumerate() {
        let a = run_cli(args, 1, &dir.path().join(format!("{k}-a")))?;
        let b = run_cli(args, 4, &dir.path().join(format!("{k}-b")))?;
        let c = run_cli(args, 4, &dir.path().join(format!("{k}-c")))?;
        if a != b || b != c {
            eprintln!("  outputs differ for {args:?}");
            differing += 1;
        }
    }
    Ok(vec![CheckResult::at_most("commands_with_differing_output", differing as f64, 0.0)])
}

fn main() {
    let criteria = [
        Criterion { id: 1, title: "bare core averages to zero", budget: Duration::from_secs(30), run: zero_mean_core },
        Criterion { id: 2, title: "optimal mean PSF and angles", budget: Duration::from_secs(300), run: optimal_value },
        Criterion { id: 3, title: "vanishing gradient at extrema", budget: Duration::from_secs(60), run: gradient },
        Criterion { id: 4, title: "equatorial perfect synchronization", budget: Duration::from_secs(10), run: equatorial },
        Criterion { id: 5, title: "concurrence encodes phase difference", budget: Duration::from_secs(10), run: concurrence },
        Criterion { id: 6, title: "known-blank synchronization", budget: Duration::from_secs(10), run: blank_sync },
        Criterion { id: 7, title: "closed forms match simulation", budget: Duration::from_secs(30), run: oracles },
        Criterion { id: 8, title: "imperfection witness for every circuit", budget: Duration::from_secs(120), run: witness },
        Criterion { id: 9, title: "undefined set is negligible", budget: Duration::from_secs(60), run: undefined_fraction },
        Criterion { id: 10, title: "relative-phase distribution shape", budget: Duration::from_secs(60), run: phase_distribution },
        Criterion { id: 11, title: "latitude sweep", budget: Duration::from_secs(10), run: latitude },
        Criterion { id: 12, title: "bit-identical reruns", budget: Duration::from_secs(60), run: determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let (ok, detail) = match result {
            Ok(checks) => {
                (checks.iter().all(|r| r.passed), checks.iter().map(describe).collect::<Vec<_>>().join("; "))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        let verdict = if ok && in_time { "PASS" } else { "FAIL" };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict} {}: {detail}; time {:.1}s (budget {}s)",
            c.id,
            c.title,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
