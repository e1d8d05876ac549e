//! Multi-start gradient ascent of the mean PSF over the eight circuit angles,
//! classification of extrema, and the falsification scans for the
//! impossibility and measure-zero results.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::average::{grad_mean_psf_rule, sharded_samples, QuadratureRule, DEFAULT_QUAD_ORDER};
use crate::closedform::proof_state_catalog;
use crate::error::{invalid, Result};
use crate::gates::{u_g, u_g_angles, CircuitParams};
use crate::psf::{fidelity_from_bloch, PureProductKernel};
use crate::states::wrap_pi;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    CondMax,
    CondMaxReduced,
    Minimum,
    SaddleOrOther,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::CondMax => "CondMax",
            Self::CondMaxReduced => "CondMaxReduced",
            Self::Minimum => "Minimum",
            Self::SaddleOrOther => "Saddle-or-other",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Length in radians of the first trial step.
    pub step0: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Quadrature order used during the ascent.
    pub search_order: usize,
    /// Quadrature order used to rank and report endpoints.
    pub report_order: usize,
    pub fd_step: f64,
    pub eps_phase: f64,
    pub minimize: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            seed: 0,
            step0: 0.1,
            max_iter: 500,
            grad_tol: 1e-5,
            search_order: 12,
            report_order: DEFAULT_QUAD_ORDER,
            fd_step: 1e-4,
            eps_phase: crate::DEFAULT_EPS_PHASE,
            minimize: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartRecord {
    pub index: usize,
    /// Endpoint in unwrapped coordinates.
    pub endpoint: [f64; 8],
    pub search_value: f64,
    pub report_value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_params: CircuitParams,
    pub best_value: f64,
    pub trajectory_len: usize,
    pub restarts_used: usize,
    pub classification: Classification,
    pub restarts: Vec<RestartRecord>,
}

impl OptimizationResult {
    pub fn n_converged(&self) -> usize {
        self.restarts.iter().filter(|r| r.converged).count()
    }
}

fn norm(v: &[f64; 8]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Ascent<'a> {
    rule: &'a QuadratureRule,
    sign: f64,
    cfg: &'a OptimizerConfig,
}

impl Ascent<'_> {
    fn value(&self, x: &[f64; 8]) -> Result<f64> {
        Ok(self.sign * self.rule.integrate_unitary(&u_g_angles(x), self.cfg.eps_phase)?.value)
    }

    fn grad(&self, x: &[f64; 8]) -> Result<[f64; 8]> {
        let g = grad_mean_psf_rule(self.rule, x, self.cfg.fd_step, self.cfg.eps_phase)?;
        Ok(g.map(|v| self.sign * v))
    }

    /// Gradient ascent with Barzilai–Borwein trial steps and Armijo
    /// backtracking. Returns the endpoint, its value, gradient norm,
    /// iteration count and whether the gradient tolerance was met.
    fn run(&self, mut x: [f64; 8]) -> Result<([f64; 8], f64, f64, usize, bool)> {
        const ARMIJO: f64 = 1e-4;
        const MAX_DISPLACEMENT: f64 = 1.0;
        let mut f = self.value(&x)?;
        let mut g = self.grad(&x)?;
        let mut prev: Option<([f64; 8], [f64; 8])> = None;
        for iter in 0..self.cfg.max_iter {
            let gn = norm(&g);
            if gn < self.cfg.grad_tol {
                return Ok((x, f, gn, iter, true));
            }
            let mut t = match prev {
                Some((dx, dg)) => {
                    // ascent on f is descent on −f, whose gradient change is −dg
                    let sy: f64 = -dx.iter().zip(&dg).map(|(a, b)| a * b).sum::<f64>();
                    let ss: f64 = dx.iter().map(|a| a * a).sum();
                    if sy > 0.0 { ss / sy } else { self.cfg.step0 / gn }
                }
                None => self.cfg.step0 / gn,
            };
            t = t.min(MAX_DISPLACEMENT / gn);
            let (x_new, f_new) = loop {
                let trial: [f64; 8] = std::array::from_fn(|k| x[k] + t * g[k]);
                let ft = self.value(&trial)?;
                if ft >= f + ARMIJO * t * gn * gn {
                    break (trial, ft);
                }
                t *= 0.5;
                if t * gn < 1e-13 {
                    return Ok((x, f, gn, iter, false));
                }
            };
            let g_new = self.grad(&x_new)?;
            let dx = std::array::from_fn(|k| x_new[k] - x[k]);
            let dg = std::array::from_fn(|k| g_new[k] - g[k]);
            prev = Some((dx, dg));
            x = x_new;
            f = f_new;
            g = g_new;
        }
        let gn = norm(&g);
        Ok((x, f, gn, self.cfg.max_iter, gn < self.cfg.grad_tol))
    }
}

/// Multi-start ascent (or descent with `minimize`) of the mean PSF.
///
/// Restart `k` starts from a uniform point of `[0, 2π)⁸` drawn from ChaCha
/// stream `k` of the seed. Endpoints are re-evaluated at `report_order`
/// and the best one by that value is returned.
pub fn maximize_mean_psf(cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    if cfg.restarts == 0 {
        return Err(invalid("at least one restart is required"));
    }
    if !(cfg.step0 > 0.0 && cfg.grad_tol > 0.0) {
        return Err(invalid("step0 and grad_tol must be positive"));
    }
    let rule = QuadratureRule::new(cfg.search_order)?;
    let report_rule = QuadratureRule::new(cfg.report_order)?;
    let sign = if cfg.minimize { -1.0 } else { 1.0 };
    let ascent = Ascent { rule: &rule, sign, cfg };

    let mut records = Vec::with_capacity(cfg.restarts);
    for index in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index as u64);
        let start: [f64; 8] = std::array::from_fn(|_| rng.gen_range(0.0..TAU));
        let (endpoint, fval, grad_norm, iterations, converged) = ascent.run(start)?;
        let report_value = report_rule.integrate_unitary(&u_g_angles(&endpoint), cfg.eps_phase)?.value;
        records.push(RestartRecord {
            index,
            endpoint,
            search_value: sign * fval,
            report_value,
            grad_norm,
            iterations,
            converged,
        });
    }
    let best = records
        .iter()
        .max_by(|a, b| (sign * a.report_value).total_cmp(&(sign * b.report_value)).then(b.index.cmp(&a.index)))
        .expect("at least one restart");
    let best_params = CircuitParams::from_array(best.endpoint);
    let mut classification = classify_extremum(&best_params, 0.02);
    if cfg.minimize && classification == Classification::CondMax {
        classification = Classification::Minimum;
    }
    Ok(OptimizationResult {
        best_params,
        best_value: best.report_value,
        trajectory_len: best.iterations,
        restarts_used: cfg.restarts,
        classification,
        restarts: records,
    })
}

/// Signed offset of `x` from the nearest odd multiple of π/4.
pub fn odd_quarter_residual(x: f64) -> f64 {
    let r = (x - FRAC_PI_4).rem_euclid(FRAC_PI_2);
    if r > FRAC_PI_4 {
        r - FRAC_PI_2
    } else {
        r
    }
}

/// Residuals of `α, β, γ` to the maximizing set `{π/4, 3π/4, 5π/4, 7π/4}`.
pub fn condmax_residuals(params: &CircuitParams) -> [f64; 3] {
    [params.alpha, params.beta, params.gamma].map(odd_quarter_residual)
}

fn near(x: f64, target: f64, tol: f64) -> bool {
    wrap_pi(x - target).abs() <= tol
}

/// True when `x` is within `tol` of an integer multiple of π.
fn near_multiple_of_pi(x: f64, tol: f64) -> bool {
    near(x, 0.0, tol) || near(x, PI, tol)
}

/// Angle-based classification.
///
/// * `CondMax`: `α, β, γ` within `tol` of the maximizing set.
/// * `CondMaxReduced`: additionally `σ₁ = μ₂ = ν₂ = 0` and
///   `μ₁ = π/2` if `α+γ ∈ πℤ` else `3π/2`, `ν₁ = 0` if `α+β ∈ πℤ` else `π`.
/// * `Minimum`: the reduced form with `σ₁ = π` instead.
///
/// Away from the reduced form angles alone cannot tell a maximum from its
/// σ₁-shifted minimum; both report `CondMax`.
pub fn classify_extremum(params: &CircuitParams, tol: f64) -> Classification {
    if condmax_residuals(params).iter().any(|r| r.abs() > tol) {
        return Classification::SaddleOrOther;
    }
    let mu1 = if near_multiple_of_pi(params.alpha + params.gamma, 2.0 * tol) { FRAC_PI_2 } else { 3.0 * FRAC_PI_2 };
    let nu1 = if near_multiple_of_pi(params.alpha + params.beta, 2.0 * tol) { 0.0 } else { PI };
    let reduced_locals = near(params.mu2, 0.0, tol)
        && near(params.nu2, 0.0, tol)
        && near(params.mu1, mu1, tol)
        && near(params.nu1, nu1, tol);
    if reduced_locals && near(params.sigma1, 0.0, tol) {
        Classification::CondMaxReduced
    } else if reduced_locals && near(params.sigma1, PI, tol) {
        Classification::Minimum
    } else {
        Classification::CondMax
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WitnessSource {
    Fixture(u8),
    Grid,
}

/// An input whose PSF is defined but short of perfect synchronization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// `(θ₁, θ₂, φ₁, φ₂)`.
    pub input: [f64; 4],
    pub value: f64,
    pub source: WitnessSource,
}

/// Searches the proof-state fixtures, then a `resolution⁴` grid with
/// `θ ∈ [0, π]` and `φ ∈ [0, 2π)`, for a pure product input with defined
/// PSF below `1 − 1e-6`. `None` would contradict the impossibility of
/// perfect synchronization and must be treated as a failure.
pub fn imperfection_witness(params: &CircuitParams, resolution: usize, eps: f64) -> Result<Option<Witness>> {
    if resolution < 8 {
        return Err(invalid(format!("witness grid resolution {resolution} below 8")));
    }
    const GAP: f64 = 1e-6;
    let kernel = PureProductKernel::new(&u_g(params))?;
    let eval = |input: [f64; 4]| {
        let [t1, t2, p1, p2] = input;
        let amp = |t: f64, p: f64| {
            let (s, c) = (t / 2.0).sin_cos();
            [crate::linalg::c(c, 0.0), crate::linalg::C64::from_polar(s, p)]
        };
        let (n1, n2) = kernel.output_bloch(amp(t1, p1), amp(t2, p2));
        fidelity_from_bloch(&n1, &n2, eps).value.filter(|v| *v < 1.0 - GAP)
    };
    for fixture in proof_state_catalog() {
        let input = fixture.input_at(params.alpha, params.beta, params.gamma);
        if let Some(value) = eval(input) {
            return Ok(Some(Witness { input, value, source: WitnessSource::Fixture(fixture.id) }));
        }
    }
    let thetas: Vec<f64> = (0..resolution).map(|i| PI * i as f64 / (resolution - 1) as f64).collect();
    let phis: Vec<f64> = (0..resolution).map(|i| TAU * i as f64 / resolution as f64).collect();
    for &t1 in &thetas {
        for &t2 in &thetas {
            for &p1 in &phis {
                for &p2 in &phis {
                    let input = [t1, t2, p1, p2];
                    if let Some(value) = eval(input) {
                        return Ok(Some(Witness { input, value, source: WitnessSource::Grid }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Fraction of `n_samples` uniform inputs whose smaller output phase
/// projection norm is at most each threshold in `eps_list`.
pub fn undefined_fraction_scan(params: &CircuitParams, n_samples: u64, eps_list: &[f64], seed: u64) -> Result<Vec<f64>> {
    if n_samples < 10_000 {
        return Err(invalid(format!("undefined-fraction scan needs at least 10^4 samples, got {n_samples}")));
    }
    let kernel = PureProductKernel::new(&u_g(params))?;
    let shards = sharded_samples(
        n_samples,
        seed,
        || vec![0u64; eps_list.len()],
        |counts, s| {
            let (a, b) = s.amplitudes();
            let (n1, n2) = kernel.output_bloch(a, b);
            let m = n1.projection().norm().min(n2.projection().norm());
            for (c, eps) in counts.iter_mut().zip(eps_list) {
                if m <= *eps {
                    *c += 1;
                }
            }
        },
    );
    let mut totals = vec![0u64; eps_list.len()];
    for shard in shards {
        for (t, c) in totals.iter_mut().zip(shard) {
            *t += c;
        }
    }
    Ok(totals.into_iter().map(|c| c as f64 / n_samples as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_EPS_PHASE as EPS;

    #[test]
    fn residuals() {
        assert!(odd_quarter_residual(3.0 * FRAC_PI_4).abs() < 1e-15);
        assert!((odd_quarter_residual(FRAC_PI_4 + 0.1) - 0.1).abs() < 1e-12);
        assert!((odd_quarter_residual(FRAC_PI_4 - 0.1) + 0.1).abs() < 1e-12);
        assert!((odd_quarter_residual(0.0).abs() - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn classification_examples() {
        let umax = CircuitParams::u_max();
        assert_eq!(classify_extremum(&umax, 0.02), Classification::CondMaxReduced);
        assert_eq!(classify_extremum(&umax.with_sigma1(PI), 0.02), Classification::Minimum);
        assert_eq!(classify_extremum(&CircuitParams::zeros(), 0.02), Classification::SaddleOrOther);
        let general = CircuitParams::from_array([FRAC_PI_4, 5.0 * FRAC_PI_4, 7.0 * FRAC_PI_4, 0.3, 1.0, 2.0, 0.5, 0.1]);
        assert_eq!(classify_extremum(&general, 0.02), Classification::CondMax);
        // α+γ = π/2 ∉ πℤ ⇒ μ₁ = 3π/2; α+β = π/2 ⇒ ν₁ = π
        let other = CircuitParams::from_array([FRAC_PI_4, FRAC_PI_4, FRAC_PI_4, 3.0 * FRAC_PI_2, 0.0, PI, 0.0, 0.0]);
        assert_eq!(classify_extremum(&other, 0.02), Classification::CondMaxReduced);
    }

    #[test]
    fn witnesses_for_umax_and_swap() {
        let w = imperfection_witness(&CircuitParams::u_max(), 8, EPS).unwrap().unwrap();
        assert!(w.value < 1.0 - 1e-6);
        let w = imperfection_witness(&CircuitParams::zeros(), 8, EPS).unwrap().unwrap();
        assert!(w.value < 1.0 - 1e-6);
        assert!(imperfection_witness(&CircuitParams::zeros(), 4, EPS).is_err());
    }

    #[test]
    fn undefined_fractions_are_monotone_and_reproducible() {
        let eps = [1e-2, 1e-4, 1e-6];
        let a = undefined_fraction_scan(&CircuitParams::u_max(), 20_000, &eps, 5).unwrap();
        let b = undefined_fraction_scan(&CircuitParams::u_max(), 20_000, &eps, 5).unwrap();
        assert_eq!(a, b);
        assert!(a[0] >= a[1] && a[1] >= a[2]);
        assert!(a[2] <= 1e-3);
        assert!(undefined_fraction_scan(&CircuitParams::u_max(), 100, &eps, 5).is_err());
        let z = undefined_fraction_scan(&CircuitParams::zeros(), 20_000, &[1e-9], 5).unwrap();
        assert_eq!(z, vec![0.0]);
    }

    #[test]
    fn short_ascent_improves_objective() {
        let cfg = OptimizerConfig { restarts: 1, max_iter: 5, search_order: 6, report_order: 8, ..Default::default() };
        let res = maximize_mean_psf(&cfg).unwrap();
        let rec = &res.restarts[0];
        let rule = QuadratureRule::new(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        rng.set_stream(0);
        let start: [f64; 8] = std::array::from_fn(|_| rng.gen_range(0.0..TAU));
        let f0 = rule.integrate_unitary(&u_g_angles(&start), EPS).unwrap().value;
        assert!(rec.search_value >= f0);
        assert!(maximize_mean_psf(&OptimizerConfig { restarts: 0, ..Default::default() }).is_err());
    }
}
