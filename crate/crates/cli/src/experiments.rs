//! One function per command. Each returns a [`Table`] without header; the
//! resolved configuration is attached by [`crate::run`].

use std::f64::consts::{PI, TAU};

use qps_core::average::{mean_psf_montecarlo, mean_psf_quadrature, sharded_samples};
use qps_core::gates::{u_g, CircuitParams};
use qps_core::linalg::tensor_product;
use qps_core::ComplexMatrix;
use qps_core::optimize::{
    classify_extremum, condmax_residuals, maximize_mean_psf, imperfection_witness, Classification, OptimizerConfig,
    WitnessSource,
};
use qps_core::psf::{concurrence, fidelity_from_bloch, psf, relative_phase_from_projections, PureProductKernel};
use qps_core::states::{equatorial_state, from_bloch, BlochVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::table::{Cell, Table};

const PARAM_COLUMNS: [&str; 8] = CircuitParams::NAMES;

fn with_params(base: &[&str], tail: &[&str]) -> Vec<String> {
    base.iter().chain(PARAM_COLUMNS.iter()).chain(tail.iter()).map(|s| s.to_string()).collect()
}

fn param_cells(p: &CircuitParams) -> impl Iterator<Item = Cell> {
    p.to_array().into_iter().map(Cell::num)
}

pub fn run_optimize(cfg: &ExperimentConfig) -> Result<Table> {
    let opt = OptimizerConfig {
        restarts: cfg.restarts,
        seed: cfg.seed,
        step0: cfg.step0,
        max_iter: cfg.max_iter,
        grad_tol: cfg.grad_tol,
        report_order: cfg.quad_order,
        eps_phase: cfg.eps_phase,
        minimize: cfg.minimize,
        ..OptimizerConfig::default()
    };
    let res = maximize_mean_psf(&opt)?;
    let cols = with_params(
        &["kind", "index", "value", "classification", "converged", "iterations", "grad_norm"],
        &["residual_alpha", "residual_beta", "residual_gamma"],
    );
    let mut t = Table::new(&cols);
    let row = |kind: &str, index: usize, value: f64, class: Classification, rec: &qps_core::optimize::RestartRecord, p: &CircuitParams| {
        let mut r = vec![
            Cell::text(kind),
            Cell::num(index as f64),
            Cell::num(value),
            Cell::text(class.to_string()),
            Cell::text(rec.converged.to_string()),
            Cell::num(rec.iterations as f64),
            Cell::num(rec.grad_norm),
        ];
        r.extend(param_cells(p));
        r.extend(condmax_residuals(p).map(Cell::num));
        r
    };
    let best_rec = res
        .restarts
        .iter()
        .find(|r| CircuitParams::from_array(r.endpoint) == res.best_params)
        .expect("best params come from a restart");
    t.push(row("best", best_rec.index, res.best_value, res.classification, best_rec, &res.best_params));
    for rec in &res.restarts {
        let p = CircuitParams::from_array(rec.endpoint);
        let mut class = classify_extremum(&p, 0.02);
        if cfg.minimize && class == Classification::CondMax {
            class = Classification::Minimum;
        }
        t.push(row("restart", rec.index, rec.report_value, class, rec, &p));
    }
    t.meta("note", "angles are reduced into [0, 2pi); residuals are offsets from the nearest odd multiple of pi/4");
    Ok(t)
}

pub fn run_mean_psf(cfg: &ExperimentConfig) -> Result<Table> {
    let p = cfg.params_or_umax();
    let q = mean_psf_quadrature(&p, cfg.quad_order, cfg.eps_phase)?;
    let mc = mean_psf_montecarlo(&p, cfg.n_samples, cfg.seed, cfg.eps_phase)?;
    let mut t = Table::new(&["method", "value", "std_error", "n_undefined", "n_total"]);
    for (name, e) in [("quadrature", q), ("montecarlo", mc)] {
        t.push(vec![
            Cell::text(name),
            Cell::num(e.value),
            Cell::num(e.std_error),
            Cell::num(e.n_undefined as f64),
            Cell::num(e.n_total as f64),
        ]);
    }
    Ok(t)
}

fn bin_index(x: f64, lo: f64, hi: f64, n: usize) -> usize {
    (((x - lo) / (hi - lo) * n as f64).floor().max(0.0) as usize).min(n - 1)
}

/// Per-sample relative phase and PSF, `None` when undefined.
type SampleOutcome = Option<(f64, f64)>;

fn sample_outcomes<A: Send>(
    u: &ComplexMatrix,
    n_samples: u64,
    seed: u64,
    eps: f64,
    init: impl Fn() -> A + Sync,
    visit: impl Fn(&mut A, SampleOutcome) + Sync,
) -> Result<Vec<A>> {
    let kernel = PureProductKernel::new(u)?;
    Ok(sharded_samples(n_samples, seed, init, |acc, s| {
        let (a, b) = s.amplitudes();
        let (n1, n2) = kernel.output_bloch(a, b);
        let outcome = relative_phase_from_projections(n1.projection(), n2.projection(), eps)
            .zip(fidelity_from_bloch(&n1, &n2, eps).value);
        visit(acc, outcome)
    }))
}

/// Binned relative phase over `[-π, π)` and PSF over `[-1, 1)`; the top edge
/// of each range falls into the last bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Histograms {
    pub phase: Vec<u64>,
    pub psf: Vec<u64>,
    pub undefined: u64,
}

impl Histograms {
    fn empty(bins_phase: usize, bins_psf: usize) -> Self {
        Self { phase: vec![0; bins_phase], psf: vec![0; bins_psf], undefined: 0 }
    }
}

pub fn histograms(
    u: &ComplexMatrix,
    n_samples: u64,
    seed: u64,
    eps: f64,
    bins_phase: usize,
    bins_psf: usize,
) -> Result<Histograms> {
    let shards = sample_outcomes(
        u,
        n_samples,
        seed,
        eps,
        || Histograms::empty(bins_phase, bins_psf),
        |h, o| match o {
            Some((dphi, f)) => {
                h.phase[bin_index(dphi, -PI, PI, bins_phase)] += 1;
                h.psf[bin_index(f, -1.0, 1.0, bins_psf)] += 1;
            }
            None => h.undefined += 1,
        },
    )?;
    let mut total = Histograms::empty(bins_phase, bins_psf);
    for h in shards {
        total.phase.iter_mut().zip(&h.phase).for_each(|(a, b)| *a += b);
        total.psf.iter_mut().zip(&h.psf).for_each(|(a, b)| *a += b);
        total.undefined += h.undefined;
    }
    Ok(total)
}

pub fn run_distributions(cfg: &ExperimentConfig) -> Result<Table> {
    let u = u_g(&cfg.params_or_umax());
    if cfg.raw {
        let shards =
            sample_outcomes(&u, cfg.n_samples, cfg.seed, cfg.eps_phase, Vec::new, |v: &mut Vec<SampleOutcome>, o| {
                v.push(o)
            })?;
        let mut t = Table::new(&["sample", "relative_phase", "psf"]);
        for (i, o) in shards.into_iter().flatten().enumerate() {
            t.push(vec![Cell::num(i as f64), Cell::opt(o.map(|x| x.0)), Cell::opt(o.map(|x| x.1))]);
        }
        return Ok(t);
    }
    let total = histograms(&u, cfg.n_samples, cfg.seed, cfg.eps_phase, cfg.bins_phase, cfg.bins_psf)?;
    let defined = (cfg.n_samples - total.undefined) as f64;
    let mut t = Table::new(&["histogram", "bin_lo", "bin_hi", "count", "density"]);
    for (name, counts, lo, hi) in [("relative_phase", &total.phase, -PI, PI), ("psf", &total.psf, -1.0, 1.0)] {
        let w = (hi - lo) / counts.len() as f64;
        for (b, &c) in counts.iter().enumerate() {
            t.push(vec![
                Cell::text(name),
                Cell::num(lo + b as f64 * w),
                Cell::num(lo + (b + 1) as f64 * w),
                Cell::num(c as f64),
                Cell::num(c as f64 / defined),
            ]);
        }
    }
    t.meta("note", "density is count over defined samples, so each histogram sums to 1");
    t.meta("undefined_samples", total.undefined.to_string());
    Ok(t)
}

/// Shape summary of a relative-phase histogram over `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShape {
    /// `Σ|P(b) − P(−b)| / Σ P(b)`.
    pub asymmetry: f64,
    pub min_center: f64,
    /// Minimum of the symmetrized density averaged over a circular window
    /// of `2·SMOOTHING_HALF_WIDTH + 1` bins; far less noisy than
    /// `min_center` when the minimum is broad.
    pub smoothed_min_center: f64,
    pub max_center_positive: f64,
    pub max_center_negative: f64,
}

pub const SMOOTHING_HALF_WIDTH: usize = 7;

pub fn phase_shape(density: &[f64]) -> PhaseShape {
    let n = density.len();
    let w = TAU / n as f64;
    let center = |b: usize| -PI + (b as f64 + 0.5) * w;
    let total: f64 = density.iter().sum();
    let asym: f64 = (0..n).map(|b| (density[b] - density[n - 1 - b]).abs()).sum::<f64>() / total;
    let argmin = (0..n).min_by(|&a, &b| density[a].total_cmp(&density[b])).expect("nonempty");
    let argmax_in = |pred: &dyn Fn(f64) -> bool| {
        (0..n).filter(|&b| pred(center(b))).max_by(|&a, &b| density[a].total_cmp(&density[b])).map(center)
    };
    let sym: Vec<f64> = (0..n).map(|b| density[b] + density[n - 1 - b]).collect();
    let k = SMOOTHING_HALF_WIDTH.min((n - 1) / 2);
    let smoothed: Vec<f64> = (0..n).map(|b| (0..=2 * k).map(|j| sym[(b + n + j - k) % n]).sum()).collect();
    let smoothed_argmin = (0..n).min_by(|&a, &b| smoothed[a].total_cmp(&smoothed[b])).expect("nonempty");
    PhaseShape {
        asymmetry: asym,
        min_center: center(argmin),
        smoothed_min_center: center(smoothed_argmin),
        max_center_positive: argmax_in(&|c| c > 0.0).unwrap_or(f64::NAN),
        max_center_negative: argmax_in(&|c| c < 0.0).unwrap_or(f64::NAN),
    }
}

/// Extracts one histogram's densities from a distributions table.
pub fn densities(t: &Table, histogram: &str) -> Vec<f64> {
    let (h, d) = (t.column("histogram").expect("histogram column"), t.column("density").expect("density column"));
    t.rows
        .iter()
        .filter(|r| r[h] == Cell::text(histogram))
        .map(|r| r[d].as_f64().unwrap_or(0.0))
        .collect()
}

pub fn latitude_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| PI * k as f64 / (n - 1) as f64).collect()
}

pub fn run_latitude_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let u = u_g(&cfg.params_or_umax());
    let thetas = latitude_grid(cfg.theta_points);
    let dphis: Vec<f64> = (0..cfg.dphi_points).map(|k| TAU * k as f64 / cfg.dphi_points as f64).collect();
    let state = |r: f64, theta: f64, phi: f64| {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        from_bloch(&BlochVector::new(r * st * cp, r * st * sp, r * ct))
    };
    let rows: Vec<Vec<Cell>> = thetas
        .par_iter()
        .map(|&theta| {
            dphis
                .iter()
                .map(|&dphi| {
                    let rho = tensor_product(&state(cfg.r1, theta, 0.0), &state(cfg.r2, theta, dphi));
                    psf(&rho, &u, cfg.eps_phase).map(|v| vec![Cell::num(theta), Cell::num(dphi), Cell::opt(v.value)])
                })
                .collect::<qps_core::Result<Vec<_>>>()
        })
        .collect::<qps_core::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut t = Table::new(&["theta", "dphi", "psf"]);
    t.rows = rows;
    t.meta("note", "theta1 = theta2 = theta, phi1 = 0, phi2 = dphi");
    Ok(t)
}

/// Minimum defined PSF of each latitude row, in row order; `None` when the
/// whole row is undefined.
pub fn row_minima(t: &Table) -> Vec<(f64, Option<f64>)> {
    let (ct, cf) = (t.column("theta").expect("theta column"), t.column("psf").expect("psf column"));
    let mut out: Vec<(f64, Option<f64>)> = Vec::new();
    for r in &t.rows {
        let theta = r[ct].as_f64().expect("theta is numeric");
        let f = r[cf].as_f64();
        match out.last_mut() {
            Some((th, m)) if *th == theta => {
                if let Some(f) = f {
                    *m = Some(m.map_or(f, |m| m.min(f)));
                }
            }
            _ => out.push((theta, f)),
        }
    }
    out
}

pub fn run_concurrence_scan(cfg: &ExperimentConfig) -> Result<Table> {
    let u = u_g(&cfg.params_or_umax());
    let n = cfg.dphi_points;
    let mut t = Table::new(&["dphi", "concurrence", "expected", "abs_error"]);
    for k in 0..=n {
        let dphi = -PI + TAU * k as f64 / n as f64;
        let rho = tensor_product(&equatorial_state(1.0, 0.0)?, &equatorial_state(1.0, dphi)?);
        let c = concurrence(&u.conjugate(&rho)?)?;
        let expected = (1.0 + dphi.sin()) / 2.0;
        t.push(vec![Cell::num(dphi), Cell::num(c), Cell::num(expected), Cell::num((c - expected).abs())]);
    }
    t.meta("note", "pure equatorial inputs with phi1 = 0, phi2 = dphi; expected = (1 + sin dphi)/2");
    Ok(t)
}

/// Witness scan; returns the table and the number of circuits without a
/// witness (each one a falsification event).
pub fn run_witness(cfg: &ExperimentConfig) -> Result<(Table, usize)> {
    let circuits: Vec<CircuitParams> = match cfg.params {
        Some(p) => vec![p],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..cfg.n_samples)
                .map(|_| CircuitParams::from_array(std::array::from_fn(|_| rng.gen_range(0.0..TAU))))
                .collect()
        }
    };
    let found = circuits
        .par_iter()
        .map(|p| imperfection_witness(p, cfg.resolution, cfg.eps_phase))
        .collect::<qps_core::Result<Vec<_>>>()?;
    let cols = with_params(&["circuit"], &["found", "source", "theta1", "theta2", "phi1", "phi2", "psf"]);
    let mut t = Table::new(&cols);
    let mut missing = 0;
    for (i, (p, w)) in circuits.iter().zip(found).enumerate() {
        let mut row = vec![Cell::num(i as f64)];
        row.extend(param_cells(p));
        match w {
            Some(w) => {
                row.push(Cell::text("true"));
                row.push(Cell::text(match w.source {
                    WitnessSource::Fixture(id) => format!("state-{id}"),
                    WitnessSource::Grid => "grid".to_string(),
                }));
                row.extend(w.input.map(Cell::num));
                row.push(Cell::num(w.value));
            }
            None => {
                missing += 1;
                row.push(Cell::text("false"));
                row.extend(std::iter::repeat_n(Cell::Missing, 6));
            }
        }
        t.push(row);
    }
    Ok((t, missing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Command;

    #[test]
    fn binning_edges() {
        assert_eq!(bin_index(-PI, -PI, PI, 180), 0);
        assert_eq!(bin_index(PI, -PI, PI, 180), 179);
        assert_eq!(bin_index(0.0, -1.0, 1.0, 100), 50);
        assert_eq!(bin_index(1.0, -1.0, 1.0, 100), 99);
    }

    #[test]
    fn phase_shape_of_symmetric_profile() {
        let d: Vec<f64> = (0..36).map(|b| 1.0 + (-PI + (b as f64 + 0.5) * TAU / 36.0).sin().abs()).collect();
        let s = phase_shape(&d);
        assert!(s.asymmetry < 1e-12);
        assert!(s.max_center_positive > 0.0 && s.max_center_negative < 0.0);
    }

    #[test]
    fn concurrence_scan_rows() {
        let mut cfg = ExperimentConfig::defaults(Command::ConcurrenceScan);
        cfg.dphi_points = 4;
        let t = run_concurrence_scan(&cfg).unwrap();
        let c: Vec<f64> = t.rows.iter().map(|r| r[1].as_f64().unwrap()).collect();
        // dphi = -π, -π/2, 0, π/2, π
        for (got, want) in c.iter().zip([0.5, 0.0, 0.5, 1.0, 0.5]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn small_distribution_run_is_normalized() {
        let mut cfg = ExperimentConfig::defaults(Command::Distributions);
        cfg.n_samples = 5_000;
        let t = run_distributions(&cfg).unwrap();
        for name in ["relative_phase", "psf"] {
            assert!((densities(&t, name).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        cfg.raw = true;
        assert_eq!(run_distributions(&cfg).unwrap().rows.len(), 5_000);
    }
}
