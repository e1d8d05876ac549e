//! Named numerical checks, each reduced to one statistic compared against a
//! fixed threshold.
//!
//! Every check draws from its own ChaCha stream of the suite seed, so adding
//! or reordering checks never changes another check's inputs. Thresholds do
//! not depend on the seed.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use qps_core::average::{grad_mean_psf, mean_psf_montecarlo_unitary, mean_psf_quadrature_angles, mean_psf_quadrature_unitary};
use qps_core::closedform::{
    bloch_after_uc, equatorial_after_umax, m1x_expansion, m2y_expansion, proof_state_catalog, ProofStateFixture,
};
use qps_core::gates::{
    bloch_rotation, c12, c21, default_blank_sync, rotation, rz, u_c, u_g, u_g_angles, CircuitParams,
};
use qps_core::linalg::{c, hermitian_eigen, partial_trace, tensor_all, tensor_product};
use qps_core::optimize::{imperfection_witness, undefined_fraction_scan};
use qps_core::psf::{concurrence, output_bloch_pair, pairwise_phase_fidelities, phase_fidelity, psf};
use qps_core::states::{
    bloch_vector, equatorial_state, from_bloch, mixed_state, pure_state, reduced_bloch_vectors, wrap_pi,
};
use qps_core::{BlochVector, ComplexMatrix, PureAngles, STRUCT_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Command, ExperimentConfig};
use crate::error::Result;
use crate::table::Cell;
use crate::experiments::{histograms, phase_shape, row_minima, run_latitude_sweep};

/// Builds the entangling core from `(α, β, γ)`. Swappable so a deliberately
/// wrong gate order can be shown to fail.
pub type CoreBuilder = fn(f64, f64, f64) -> ComplexMatrix;

pub const ORACLE_DRAWS: usize = 10_000;
pub const PAIR_DRAWS: usize = 1_000;
pub const WITNESS_CIRCUITS: usize = 1_000;
pub const ZERO_MEAN_CORES: usize = 20;
pub const RANDOM_CIRCUITS: usize = 10;
/// Quadrature order for the zero-mean and vanishing-gradient checks.
pub const CHECK_ORDER: usize = 24;
pub const FD_STEP: f64 = 1e-4;

const ORACLE_TOL: f64 = 1e-10;
const REPORTED_OPTIMUM: f64 = 0.349;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    AtMost,
    AtLeast,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::AtMost => "<=",
            Self::AtLeast => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl CheckResult {
    /// NaN statistics fail.
    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        let passed = statistic <= threshold;
        Self { name: name.into(), statistic, threshold, comparison: Comparison::AtMost, passed }
    }

    pub fn at_least(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        let passed = statistic >= threshold;
        Self { name: name.into(), statistic, threshold, comparison: Comparison::AtLeast, passed }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyContext {
    pub seed: u64,
    /// Monte Carlo budget for the sampling checks.
    pub n_samples: u64,
    /// Order of the reported mean PSF.
    pub quad_order: usize,
    pub eps: f64,
    pub resolution: usize,
    pub core: CoreBuilder,
}

impl VerifyContext {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            seed: cfg.seed,
            n_samples: cfg.n_samples,
            quad_order: cfg.quad_order,
            eps: cfg.eps_phase,
            resolution: cfg.resolution,
            core: u_c,
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

fn angle(rng: &mut impl Rng) -> f64 {
    rng.gen_range(0.0..TAU)
}

/// Polar angle of a uniformly distributed direction.
fn polar(rng: &mut impl Rng) -> f64 {
    rng.gen_range(-1.0f64..=1.0).acos()
}

fn random_angles(rng: &mut impl Rng) -> [f64; 8] {
    std::array::from_fn(|_| angle(rng))
}

fn random_axis(rng: &mut impl Rng) -> [f64; 3] {
    let (t, p) = (polar(rng), angle(rng));
    [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
}

fn random_ball(rng: &mut impl Rng) -> BlochVector {
    let [x, y, z] = random_axis(rng);
    let r = rng.gen::<f64>().cbrt();
    BlochVector::new(r * x, r * y, r * z)
}

fn random_matrix(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_density(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let a = random_matrix(rng, dim);
    let p = &a * &a.adjoint();
    let tr = p.trace();
    p.scale(c(1.0, 0.0) / tr)
}

fn pure(theta: f64, phi: f64) -> Result<ComplexMatrix> {
    Ok(pure_state(PureAngles::new(theta, phi)?))
}

fn pure_product([t1, t2, p1, p2]: [f64; 4]) -> Result<ComplexMatrix> {
    Ok(tensor_product(&pure(t1, p1)?, &pure(t2, p2)?))
}

fn swap() -> ComplexMatrix {
    ComplexMatrix::from_fn(4, |i, j| if j == ((i & 1) << 1 | i >> 1) { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// `|value − 1|`, or infinity when undefined.
fn gap_to_one(value: Option<f64>) -> f64 {
    value.map_or(f64::INFINITY, |v| (v - 1.0).abs())
}

fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    (&u.adjoint() * u).max_abs_diff(&ComplexMatrix::identity(u.dim()))
}

pub fn unitarity(ctx: &VerifyContext) -> Result<CheckResult> {
    let mut rng = ctx.rng(1);
    let mut unitaries = vec![c12(), c21(), u_g(&CircuitParams::u_max())];
    for n in 2..=4 {
        unitaries.push(default_blank_sync(n)?);
    }
    for _ in 0..100 {
        unitaries.push(u_g_angles(&random_angles(&mut rng)));
        unitaries.push((ctx.core)(angle(&mut rng), angle(&mut rng), angle(&mut rng)));
    }
    let worst = unitaries.iter().map(unitarity_defect).fold(0.0, f64::max);
    Ok(CheckResult::at_most("unitarity", worst, STRUCT_TOL))
}

/// Kronecker mixed product, partial-trace linearity and trace preservation.
pub fn linalg_identities(ctx: &VerifyContext) -> Result<CheckResult> {
    let mut rng = ctx.rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let [a, b, cm, d] = std::array::from_fn(|_| random_matrix(&mut rng, 2));
        let lhs = &tensor_product(&a, &b) * &tensor_product(&cm, &d);
        worst = worst.max(lhs.max_abs_diff(&tensor_product(&(&a * &cm), &(&b * &d))));

        let (r1, r2) = (random_density(&mut rng, 8), random_density(&mut rng, 8));
        let (x, y) = (c(rng.gen(), 0.0), c(rng.gen(), 0.0));
        let mix = &r1.scale(x) + &r2.scale(y);
        for keep in [&[0usize][..], &[1], &[0, 2]] {
            let lhs = partial_trace(&mix, keep, 3)?;
            let rhs = &partial_trace(&r1, keep, 3)?.scale(x) + &partial_trace(&r2, keep, 3)?.scale(y);
            worst = worst.max(lhs.max_abs_diff(&rhs));
            worst = worst.max((partial_trace(&r1, keep, 3)?.trace() - r1.trace()).norm());
        }
    }
    Ok(CheckResult::at_most("linalg_identities", worst, STRUCT_TOL))
}

/// Angle round trip through the Bloch vector and spectra inside `[0, 1]`.
pub fn state_construction(ctx: &VerifyContext) -> Result<Vec<CheckResult>> {
    let mut rng = ctx.rng(3);
    let (mut round_trip, mut spectrum): (f64, f64) = (0.0, 0.0);
    for _ in 0..1_000 {
        let (theta, phi) = (rng.gen_range(0.01..PI - 0.01), angle(&mut rng));
        let back = PureAngles::from_bloch(&bloch_vector(&pure(theta, phi)?)?)?;
        round_trip = round_trip.max((back.theta() - theta).abs()).max(wrap_pi(back.phi() - phi).abs());

        let rho = mixed_state(PureAngles::new(polar(&mut rng), angle(&mut rng))?, rng.gen())?;
        let (eig, _) = hermitian_eigen(&rho, STRUCT_TOL)?;
        for l in eig {
            spectrum = spectrum.max(-l).max(l - 1.0);
        }
    }
    Ok(vec![
        CheckResult::at_most("state_angle_round_trip", round_trip, ORACLE_TOL),
        CheckResult::at_most("state_spectrum_excess", spectrum, STRUCT_TOL),
    ])
}

/// Local unitaries rotate each reduced Bloch vector, for 2 to 4 qubits.
pub fn local_rotation(ctx: &VerifyContext, draws_per_size: usize) -> Result<CheckResult> {
    let mut rng = ctx.rng(4);
    let mut worst: f64 = 0.0;
    for n in 2..=4 {
        for _ in 0..draws_per_size {
            let rho = random_density(&mut rng, 1 << n);
            let axes: Vec<([f64; 3], f64)> = (0..n).map(|_| (random_axis(&mut rng), angle(&mut rng))).collect();
            let locals = axes.iter().map(|&(ax, a)| rotation(ax, a)).collect::<qps_core::Result<Vec<_>>>()?;
            let before = reduced_bloch_vectors(&rho)?;
            let after = reduced_bloch_vectors(&tensor_all(&locals).conjugate(&rho)?)?;
            for (q, &(ax, a)) in axes.iter().enumerate() {
                worst = worst.max(after[q].max_abs_diff(&before[q].transformed(&bloch_rotation(ax, a)?)));
            }
        }
    }
    Ok(CheckResult::at_most("local_rotation", worst, ORACLE_TOL))
}

pub fn core_zero_is_swap(ctx: &VerifyContext) -> Result<CheckResult> {
    Ok(CheckResult::at_most("core_zero_is_swap", (ctx.core)(0.0, 0.0, 0.0).max_abs_diff(&swap()), STRUCT_TOL))
}

fn fixture_deviation(ctx: &VerifyContext, fixtures: &[ProofStateFixture], draws: usize, stream: u64) -> Result<f64> {
    let mut rng = ctx.rng(stream);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let (a, b, g) = (angle(&mut rng), angle(&mut rng), angle(&mut rng));
        let u = (ctx.core)(a, b, g);
        for f in fixtures {
            let (m1, m2) = output_bloch_pair(&pure_product(f.input_at(a, b, g))?, &u)?;
            let (e1, e2) = f.expected_at(a, b, g);
            worst = worst.max(m1.max_abs_diff(&e1)).max(m2.max_abs_diff(&e2));
        }
    }
    Ok(worst)
}

/// One proof-state fixture against the matrix simulation of the core.
pub fn proof_state(ctx: &VerifyContext, id: u8, draws: usize) -> Result<CheckResult> {
    let fixture: Vec<_> = proof_state_catalog().into_iter().filter(|f| f.id == id).collect();
    let worst = fixture_deviation(ctx, &fixture, draws, 100 + id as u64)?;
    Ok(CheckResult::at_most(format!("proof_state_{id}"), worst, ORACLE_TOL))
}

pub fn proof_state_catalog_check(ctx: &VerifyContext, draws: usize) -> Result<CheckResult> {
    let worst = fixture_deviation(ctx, &proof_state_catalog(), draws, 5)?;
    Ok(CheckResult::at_most("proof_state_catalog", worst, ORACLE_TOL))
}

/// Closed-form core outputs against the matrix simulation on random inputs.
pub fn core_closed_form(ctx: &VerifyContext, draws: usize) -> Result<CheckResult> {
    let mut rng = ctx.rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let input = [polar(&mut rng), polar(&mut rng), angle(&mut rng), angle(&mut rng)];
        let (a, b, g) = (angle(&mut rng), angle(&mut rng), angle(&mut rng));
        let (m1, m2) = output_bloch_pair(&pure_product(input)?, &(ctx.core)(a, b, g))?;
        let [t1, t2, p1, p2] = input;
        let (e1, e2) = bloch_after_uc(t1, t2, p1, p2, a, b, g);
        worst = worst.max(m1.max_abs_diff(&e1)).max(m2.max_abs_diff(&e2));
    }
    Ok(CheckResult::at_most("core_closed_form", worst, ORACLE_TOL))
}

/// Trigonometric expansions of the output phase components of the full
/// circuit against the matrix simulation.
pub fn local_expansions(ctx: &VerifyContext, draws: usize) -> Result<CheckResult> {
    let mut rng = ctx.rng(7);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let input = [polar(&mut rng), polar(&mut rng), angle(&mut rng), angle(&mut rng)];
        let params = CircuitParams::from_array(random_angles(&mut rng));
        let (m1, m2) = output_bloch_pair(&pure_product(input)?, &u_g(&params))?;
        let [t1, t2, p1, p2] = input;
        worst = worst
            .max((m1x_expansion(t1, t2, p1, p2, &params) - m1.x).abs())
            .max((m2y_expansion(t1, t2, p1, p2, &params) - m2.y).abs());
    }
    Ok(CheckResult::at_most("local_expansions", worst, ORACLE_TOL))
}

/// The first proof state loses both Bloch vectors when `α + β` is an odd
/// multiple of `π/2`, the second when `α − β` is.
pub fn undefined_locus(ctx: &VerifyContext) -> Result<CheckResult> {
    let mut rng = ctx.rng(8);
    let catalog = proof_state_catalog();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (a, g) = (angle(&mut rng), angle(&mut rng));
        let offset = FRAC_PI_2 + rng.gen_range(-3..=3) as f64 * PI;
        for (f, b) in [(&catalog[0], offset - a), (&catalog[1], a - offset)] {
            let (e1, e2) = f.expected_at(a, b, g);
            let (m1, m2) = output_bloch_pair(&pure_product(f.input_at(a, b, g))?, &(ctx.core)(a, b, g))?;
            worst = worst.max(e1.norm()).max(e2.norm()).max(m1.norm()).max(m2.norm());
        }
    }
    Ok(CheckResult::at_most("undefined_locus", worst, STRUCT_TOL))
}

/// Mixed equatorial inputs under the optimal circuit: PSF exactly 1 and
/// outputs equal to the closed form.
pub fn equatorial_sync(ctx: &VerifyContext, draws: usize) -> Result<CheckResult> {
    let mut rng = ctx.rng(9);
    let u = u_g(&CircuitParams::u_max());
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let (r1, r2) = (1.0 - rng.gen::<f64>(), 1.0 - rng.gen::<f64>());
        let (p1, p2) = (angle(&mut rng), angle(&mut rng));
        let rho = tensor_product(&equatorial_state(r1, p1)?, &equatorial_state(r2, p2)?);
        let (m1, m2) = output_bloch_pair(&rho, &u)?;
        let (e1, e2) = equatorial_after_umax(r1, r2, p1, p2);
        worst = worst.max(gap_to_one(psf(&rho, &u, ctx.eps)?.value));
        worst = worst.max(m1.max_abs_diff(&e1)).max(m2.max_abs_diff(&e2));
    }
    Ok(CheckResult::at_most("equatorial_sync", worst, ORACLE_TOL))
}

/// Output concurrence of pure equatorial pairs equals `(1 + sin Δφ)/2`.
pub fn concurrence_encoding(ctx: &VerifyContext, draws: usize) -> Result<CheckResult> {
    let mut rng = ctx.rng(10);
    let u = u_g(&CircuitParams::u_max());
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let (p1, p2) = (angle(&mut rng), angle(&mut rng));
        let rho = tensor_product(&equatorial_state(1.0, p1)?, &equatorial_state(1.0, p2)?);
        let expected = (1.0 + (p2 - p1).sin()) / 2.0;
        worst = worst.max((concurrence(&u.conjugate(&rho)?)? - expected).abs());
    }
    Ok(CheckResult::at_most("concurrence_encoding", worst, ORACLE_TOL))
}

fn blank_input(first: ComplexMatrix, n_qubits: usize) -> Result<ComplexMatrix> {
    let zero = pure(0.0, 0.0)?;
    let mut factors = vec![first];
    factors.extend(std::iter::repeat_n(zero, n_qubits - 1));
    Ok(tensor_all(&factors))
}

/// A mixed unknown qubit fanned out to blank qubits synchronizes every pair;
/// a pure equatorial unknown qubit leaves every phase undefined.
pub fn blank_sync(ctx: &VerifyContext, draws: usize) -> Result<Vec<CheckResult>> {
    let mut rng = ctx.rng(11);
    let (mut worst, mut defined_at_equator): (f64, usize) = (0.0, 0);
    for n in [2, 3] {
        let u = default_blank_sync(n)?;
        for _ in 0..draws {
            let theta = loop {
                let t = rng.gen_range(0.0..=PI);
                if (t - FRAC_PI_2).abs() > 0.01 {
                    break t;
                }
            };
            let p = rng.gen_range(0.05..=1.0);
            let rho = blank_input(mixed_state(PureAngles::new(theta, angle(&mut rng))?, p)?, n)?;
            for (_, f) in pairwise_phase_fidelities(&u.conjugate(&rho)?, ctx.eps)? {
                worst = worst.max(gap_to_one(f.value));
            }
            let rho = blank_input(pure(FRAC_PI_2, angle(&mut rng))?, n)?;
            defined_at_equator += pairwise_phase_fidelities(&u.conjugate(&rho)?, ctx.eps)?
                .iter()
                .filter(|(_, f)| f.is_defined())
                .count();
        }
    }
    Ok(vec![
        CheckResult::at_most("blank_sync", worst, ORACLE_TOL),
        CheckResult::at_most("blank_sync_equator_defined", defined_at_equator as f64, 0.0),
    ])
}

/// Symmetry of the phase fidelity, invariance under common z rotations,
/// SWAP acting like the identity, and the sign flip from a final `R_z(π)`.
pub fn fidelity_symmetries(ctx: &VerifyContext, draws: usize) -> Result<Vec<CheckResult>> {
    let mut rng = ctx.rng(12);
    let (id, sw) = (ComplexMatrix::identity(4), swap());
    let flip = tensor_product(&rz(PI), &ComplexMatrix::identity(2));
    let (mut sym, mut zrot, mut swap_gap, mut sign): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let diff = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => (a - b).abs(),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    };
    for _ in 0..draws {
        let (r1, r2) = (from_bloch(&random_ball(&mut rng)), from_bloch(&random_ball(&mut rng)));
        let f = phase_fidelity(&r1, &r2, ctx.eps)?.value;
        sym = sym.max(diff(f, phase_fidelity(&r2, &r1, ctx.eps)?.value));
        let z = rz(angle(&mut rng));
        zrot = zrot.max(diff(f, phase_fidelity(&z.conjugate(&r1)?, &z.conjugate(&r2)?, ctx.eps)?.value));

        let rho = tensor_product(&r1, &r2);
        swap_gap = swap_gap.max(diff(psf(&rho, &sw, ctx.eps)?.value, psf(&rho, &id, ctx.eps)?.value));

        let u = u_g_angles(&random_angles(&mut rng));
        let a = psf(&rho, &u, ctx.eps)?.value;
        let b = psf(&rho, &(&flip * &u), ctx.eps)?.value;
        sign = sign.max(diff(a, b.map(|v| -v)));
    }
    Ok(vec![
        CheckResult::at_most("fidelity_symmetric", sym, ORACLE_TOL),
        CheckResult::at_most("fidelity_z_rotation_invariant", zrot, ORACLE_TOL),
        CheckResult::at_most("swap_matches_identity", swap_gap, ORACLE_TOL),
        CheckResult::at_most("rz_pi_flips_sign", sign, ORACLE_TOL),
    ])
}

/// Shifting any circuit angle by 2π changes neither pointwise PSF values nor
/// the quadrature mean.
pub fn shift_invariance(ctx: &VerifyContext, draws: usize) -> Result<CheckResult> {
    let mut rng = ctx.rng(13);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let angles = random_angles(&mut rng);
        let mut shifted = angles;
        shifted[rng.gen_range(0..8)] += TAU;
        let rho = pure_product([polar(&mut rng), polar(&mut rng), angle(&mut rng), angle(&mut rng)])?;
        let (a, b) = (psf(&rho, &u_g_angles(&angles), ctx.eps)?.value, psf(&rho, &u_g_angles(&shifted), ctx.eps)?.value);
        worst = worst.max(match (a, b) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        });
    }
    let base = CircuitParams::u_max().to_array();
    let reference = mean_psf_quadrature_angles(&base, 16, ctx.eps)?.value;
    for k in 0..8 {
        let mut shifted = base;
        shifted[k] += TAU;
        worst = worst.max((mean_psf_quadrature_angles(&shifted, 16, ctx.eps)?.value - reference).abs());
    }
    Ok(CheckResult::at_most("shift_invariance", worst, ORACLE_TOL))
}

/// The bare entangling core averages to zero.
pub fn core_mean_vanishes(ctx: &VerifyContext, cores: usize) -> Result<CheckResult> {
    let mut rng = ctx.rng(14);
    let draws: Vec<[f64; 3]> = (0..cores).map(|_| [angle(&mut rng), angle(&mut rng), angle(&mut rng)]).collect();
    let mut worst: f64 = 0.0;
    for [a, b, g] in draws {
        worst = worst.max(mean_psf_quadrature_unitary(&(ctx.core)(a, b, g), CHECK_ORDER, ctx.eps)?.value.abs());
    }
    Ok(CheckResult::at_most("core_mean_vanishes", worst, 1e-8))
}

/// The input map `(θ₁,θ₂,φ₁,φ₂) → (π−θ₁, π−θ₂, π−φ₁, −φ₂)` negates the PSF
/// of the bare core, which is why its average vanishes.
pub fn core_sign_flip(ctx: &VerifyContext, draws: usize) -> Result<CheckResult> {
    let mut rng = ctx.rng(15);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let u = (ctx.core)(angle(&mut rng), angle(&mut rng), angle(&mut rng));
        let [t1, t2, p1, p2] = [polar(&mut rng), polar(&mut rng), angle(&mut rng), angle(&mut rng)];
        let a = psf(&pure_product([t1, t2, p1, p2])?, &u, ctx.eps)?.value;
        let b = psf(&pure_product([PI - t1, PI - t2, PI - p1, -p2])?, &u, ctx.eps)?.value;
        worst = worst.max(match (a, b) {
            (Some(a), Some(b)) => (a + b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        });
    }
    Ok(CheckResult::at_most("core_sign_flip", worst, ORACLE_TOL))
}

pub fn optimum_value(ctx: &VerifyContext) -> Result<CheckResult> {
    let v = mean_psf_quadrature_unitary(&u_g(&CircuitParams::u_max()), ctx.quad_order, ctx.eps)?.value;
    Ok(CheckResult::at_most("optimum_value_offset", (v - REPORTED_OPTIMUM).abs(), 0.002))
}

/// Adding π to the last rotation maps the maximum onto a minimum of equal size.
pub fn minimum_mirrors_maximum(ctx: &VerifyContext) -> Result<CheckResult> {
    let umax = CircuitParams::u_max();
    let max = mean_psf_quadrature_unitary(&u_g(&umax), CHECK_ORDER, ctx.eps)?.value;
    let min = mean_psf_quadrature_unitary(&u_g(&umax.with_sigma1(PI)), CHECK_ORDER, ctx.eps)?.value;
    Ok(CheckResult::at_most("minimum_mirrors_maximum", (max + min).abs(), 1e-8))
}

fn max_abs(g: &[f64; 8]) -> f64 {
    g.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn stationary_points(ctx: &VerifyContext) -> Result<Vec<CheckResult>> {
    let umax = CircuitParams::u_max();
    let at_max = grad_mean_psf(&umax, CHECK_ORDER, FD_STEP, ctx.eps)?;
    let at_min = grad_mean_psf(&umax.with_sigma1(PI), CHECK_ORDER, FD_STEP, ctx.eps)?;
    let mut rng = ctx.rng(16);
    let generic = grad_mean_psf(&CircuitParams::from_array(random_angles(&mut rng)), CHECK_ORDER, FD_STEP, ctx.eps)?;
    Ok(vec![
        CheckResult::at_most("gradient_at_maximum", max_abs(&at_max), 1e-5),
        CheckResult::at_most("gradient_at_minimum", max_abs(&at_min), 1e-5),
        CheckResult::at_least("gradient_norm_generic", generic.iter().map(|x| x * x).sum::<f64>().sqrt(), 1e-3),
    ])
}

/// Quadrature against Monte Carlo in units of the Monte Carlo standard
/// error, for the optimal circuit, a random circuit and the identity.
pub fn quadrature_vs_montecarlo(ctx: &VerifyContext) -> Result<CheckResult> {
    let mut rng = ctx.rng(17);
    let circuits = [u_g(&CircuitParams::u_max()), u_g_angles(&random_angles(&mut rng)), ComplexMatrix::identity(4)];
    let mut worst: f64 = 0.0;
    for (k, u) in circuits.iter().enumerate() {
        let q = mean_psf_quadrature_unitary(u, ctx.quad_order, ctx.eps)?;
        let mc = mean_psf_montecarlo_unitary(u, ctx.n_samples, ctx.seed.wrapping_add(k as u64), ctx.eps)?;
        let se = (q.std_error.powi(2) + mc.std_error.powi(2)).sqrt();
        worst = worst.max((q.value - mc.value).abs() / se);
    }
    Ok(CheckResult::at_most("quadrature_vs_montecarlo_sigmas", worst, 4.0))
}

/// Every random circuit has an input with defined PSF short of 1.
pub fn witness_search(ctx: &VerifyContext, circuits: usize) -> Result<CheckResult> {
    let mut rng = ctx.rng(18);
    let params: Vec<CircuitParams> = (0..circuits).map(|_| CircuitParams::from_array(random_angles(&mut rng))).collect();
    let found = params
        .par_iter()
        .map(|p| imperfection_witness(p, ctx.resolution, ctx.eps))
        .collect::<qps_core::Result<Vec<_>>>()?;
    let missing = found.iter().filter(|w| w.is_none()).count();
    Ok(CheckResult::at_most("witness_missing", missing as f64, 0.0))
}

/// Fractions of inputs with a vanishing output phase projection.
pub fn undefined_fractions(ctx: &VerifyContext, random_circuits: usize) -> Result<Vec<CheckResult>> {
    const EPS_LIST: [f64; 3] = [1e-2, 1e-4, 1e-6];
    let mut rng = ctx.rng(19);
    let mut circuits = vec![CircuitParams::u_max()];
    circuits.extend((0..random_circuits).map(|_| CircuitParams::from_array(random_angles(&mut rng))));
    let (mut worst, mut increases): (f64, usize) = (0.0, 0);
    for (k, p) in circuits.iter().enumerate() {
        let fr = undefined_fraction_scan(p, ctx.n_samples, &EPS_LIST, ctx.seed.wrapping_add(k as u64))?;
        worst = worst.max(fr[2]);
        increases += fr.windows(2).filter(|w| w[1] > w[0]).count();
    }
    Ok(vec![
        CheckResult::at_most("undefined_fraction", worst, 1e-3),
        CheckResult::at_most("undefined_fraction_increases", increases as f64, 0.0),
    ])
}

/// Shape of the relative-phase distribution under the optimal circuit.
pub fn phase_distribution_shape(ctx: &VerifyContext) -> Result<Vec<CheckResult>> {
    let h = histograms(&u_g(&CircuitParams::u_max()), ctx.n_samples, ctx.seed, ctx.eps, 180, 100)?;
    let defined = (ctx.n_samples - h.undefined) as f64;
    let density: Vec<f64> = h.phase.iter().map(|&c| c as f64 / defined).collect();
    let s = phase_shape(&density);
    Ok(vec![
        CheckResult::at_most("phase_asymmetry", s.asymmetry, 0.02),
        CheckResult::at_most("phase_minimum_offset_from_pi", PI - s.smoothed_min_center.abs(), 10f64.to_radians()),
        CheckResult::at_most("phase_maximum_positive_offset", (s.max_center_positive - FRAC_PI_2).abs(), FRAC_PI_4),
        CheckResult::at_most("phase_maximum_negative_offset", (s.max_center_negative + FRAC_PI_2).abs(), FRAC_PI_4),
    ])
}

/// Per-bin bound for 180 bins whose family-wise false-alarm rate equals that
/// of a single 4σ test, so the verdict does not hinge on the seed.
pub const UNIFORM_BIN_SIGMAS: f64 = 5.1;

/// Without a circuit the relative phase is uniform: largest per-bin
/// deviation in binomial standard deviations.
pub fn identity_phase_uniform(ctx: &VerifyContext) -> Result<CheckResult> {
    const BINS: usize = 180;
    let h = histograms(&ComplexMatrix::identity(4), ctx.n_samples, ctx.seed, ctx.eps, BINS, 2)?;
    let n = (ctx.n_samples - h.undefined) as f64;
    let p = 1.0 / BINS as f64;
    let sd = (n * p * (1.0 - p)).sqrt();
    let worst = h.phase.iter().map(|&c| (c as f64 - n * p).abs() / sd).fold(0.0, f64::max);
    Ok(CheckResult::at_most("identity_phase_uniform_sigmas", worst, UNIFORM_BIN_SIGMAS))
}

/// Equal-latitude sweep: perfect synchronization on the equator, for pure
/// and mixed inputs, degrading monotonically towards the poles.
pub fn latitude_sweep(ctx: &VerifyContext, theta_points: usize, dphi_points: usize) -> Result<Vec<CheckResult>> {
    let mut cfg = ExperimentConfig::defaults(Command::LatitudeSweep);
    cfg.eps_phase = ctx.eps;
    cfg.theta_points = theta_points;
    cfg.dphi_points = dphi_points;
    // A pure equatorial pair with Δφ = π/2 leaves the output maximally
    // entangled, so that single cell is undefined rather than 1.
    let equator_gap = |cfg: &ExperimentConfig| -> Result<f64> {
        let t = run_latitude_sweep(cfg)?;
        let [ct, cd, cf] = ["theta", "dphi", "psf"].map(|n| t.column(n).expect("sweep column"));
        let row: Vec<_> = t.rows.iter().filter(|r| r[ct].as_f64() == Some(FRAC_PI_2)).collect();
        if row.is_empty() {
            return Ok(f64::INFINITY);
        }
        let entangling = |r: &[Cell]| r[cd].as_f64().is_some_and(|d| (d - FRAC_PI_2).abs() < 1e-12);
        Ok(row
            .iter()
            .map(|r| match r[cf].as_f64() {
                None if cfg.r1 == 1.0 && cfg.r2 == 1.0 && entangling(r) => 0.0,
                v => gap_to_one(v),
            })
            .fold(0.0, f64::max))
    };
    let pure_gap = equator_gap(&cfg)?;
    let minima = row_minima(&run_latitude_sweep(&cfg)?);
    let mut mixed = cfg.clone();
    mixed.r1 = 0.3;
    mixed.r2 = 0.9;
    let mixed_gap = equator_gap(&mixed)?;
    Ok(vec![
        CheckResult::at_most("latitude_equator_row", pure_gap, ORACLE_TOL),
        CheckResult::at_most("latitude_equator_row_mixed", mixed_gap, ORACLE_TOL),
        CheckResult::at_most("latitude_monotonicity_violations", monotonicity_violations(&minima) as f64, 0.0),
    ])
}

/// Number of steps away from the equator where the row minimum rises by
/// more than round-off. Rows with no defined cell are skipped.
pub fn monotonicity_violations(minima: &[(f64, Option<f64>)]) -> usize {
    let defined: Vec<(f64, f64)> = minima.iter().filter_map(|&(t, m)| m.map(|m| (t, m))).collect();
    let (north, south): (Vec<_>, Vec<_>) = defined.iter().partition(|(t, _)| *t <= FRAC_PI_2);
    let count = |side: Vec<(f64, f64)>| {
        let mut side = side;
        side.sort_by(|a, b| (a.0 - FRAC_PI_2).abs().total_cmp(&(b.0 - FRAC_PI_2).abs()));
        side.windows(2).filter(|w| w[1].1 > w[0].1 + 1e-12).count()
    };
    let equator: Vec<(f64, f64)> = north.iter().filter(|(t, _)| *t == FRAC_PI_2).copied().collect();
    let south: Vec<(f64, f64)> = equator.into_iter().chain(south).collect();
    count(north) + count(south)
}

/// Runs every check at the standard budgets.
pub fn run_suite(ctx: &VerifyContext) -> Result<Vec<CheckResult>> {
    let mut out = vec![
        unitarity(ctx)?,
        linalg_identities(ctx)?,
        local_rotation(ctx, 100)?,
        core_zero_is_swap(ctx)?,
        proof_state(ctx, 1, ORACLE_DRAWS)?,
        proof_state(ctx, 3, ORACLE_DRAWS)?,
        proof_state_catalog_check(ctx, ORACLE_DRAWS)?,
        core_closed_form(ctx, ORACLE_DRAWS)?,
        local_expansions(ctx, ORACLE_DRAWS)?,
        undefined_locus(ctx)?,
        equatorial_sync(ctx, ORACLE_DRAWS)?,
        concurrence_encoding(ctx, PAIR_DRAWS)?,
    ];
    out.extend(state_construction(ctx)?);
    out.extend(blank_sync(ctx, PAIR_DRAWS)?);
    out.extend(fidelity_symmetries(ctx, PAIR_DRAWS)?);
    out.push(shift_invariance(ctx, PAIR_DRAWS)?);
    out.push(core_mean_vanishes(ctx, ZERO_MEAN_CORES)?);
    out.push(core_sign_flip(ctx, PAIR_DRAWS)?);
    out.push(optimum_value(ctx)?);
    out.push(minimum_mirrors_maximum(ctx)?);
    out.extend(stationary_points(ctx)?);
    out.push(quadrature_vs_montecarlo(ctx)?);
    out.push(witness_search(ctx, WITNESS_CIRCUITS)?);
    out.extend(undefined_fractions(ctx, RANDOM_CIRCUITS)?);
    out.extend(phase_distribution_shape(ctx)?);
    out.push(identity_phase_uniform(ctx)?);
    out.extend(latitude_sweep(ctx, 33, 64)?);
    Ok(out)
}
