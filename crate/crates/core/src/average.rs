//! Mean PSF over uniformly distributed pure product inputs.
//!
//! Both estimators use the measure `dΩ₁dΩ₂/(4π)²` with `dΩ = sinθ dθ dφ`,
//! i.e. `cos θ` and `φ` uniform. Undefined samples are skipped and counted.
//!
//! Reductions are done in a fixed order, so results do not depend on the
//! number of rayon workers.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gates::{adjoint_action, local_layer, u_c, u_g_angles, CircuitParams};
use crate::linalg::{c, ComplexMatrix, C64};
use crate::psf::{output_from_partial, PureProductKernel};
use crate::states::BlochVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanPsfEstimate {
    pub value: f64,
    /// Zero for quadrature.
    pub std_error: f64,
    pub n_undefined: u64,
    pub n_total: u64,
}

/// Order used for reported quadrature values.
pub const DEFAULT_QUAD_ORDER: usize = 48;

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Ket amplitudes `[cos(θ/2), e^{iφ} sin(θ/2)]` from `u = cos θ`.
#[inline]
fn amplitudes_from_cos(u: f64, phi: f64) -> [C64; 2] {
    let c_half = ((1.0 + u) / 2.0).max(0.0).sqrt();
    let s_half = ((1.0 - u) / 2.0).max(0.0).sqrt();
    [c(c_half, 0.0), C64::from_polar(s_half, phi)]
}

/// Tensor-product rule on both spheres: Gauss–Legendre in `cos θ` and the
/// periodic rule in `φ`. Qubit 2's azimuths sit half a step off qubit 1's,
/// so no node has `φ₁ = φ₂` exactly; on an aligned grid the highly
/// symmetric circuits hit undefined outputs at whole families of nodes.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    order: usize,
    /// `(weight, amplitudes)` per single-qubit node; weights include `1/(2N)`.
    qubit1: Vec<(f64, [C64; 2])>,
    qubit2: Vec<(f64, [C64; 2])>,
}

impl QuadratureRule {
    pub fn new(order: usize) -> Result<Self> {
        if order < 4 {
            return Err(invalid(format!("quadrature order {order} below 4")));
        }
        let (u, w) = gauss_legendre(order);
        let n = order as f64;
        let build = |offset: f64| {
            let mut nodes = Vec::with_capacity(order * order);
            for (ui, wi) in u.iter().zip(&w) {
                for k in 0..order {
                    let phi = TAU * (k as f64 + offset) / n;
                    nodes.push((wi / (2.0 * n), amplitudes_from_cos(*ui, phi)));
                }
            }
            nodes
        };
        Ok(Self { order, qubit1: build(0.0), qubit2: build(0.5) })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_nodes(&self) -> u64 {
        (self.qubit1.len() * self.qubit2.len()) as u64
    }

    /// Reduced Bloch vectors after `u` at every node, qubit-1 index major.
    pub fn output_bloch(&self, u: &ComplexMatrix) -> Result<Vec<(BlochVector, BlochVector)>> {
        let kernel = PureProductKernel::new(u)?;
        Ok(self
            .qubit1
            .par_iter()
            .flat_map_iter(|(_, a)| {
                let v = kernel.partial_image(*a);
                self.qubit2.iter().map(move |(_, b)| output_from_partial(&v, *b))
            })
            .collect())
    }

    /// Weight of node `index` in the ordering of [`Self::output_bloch`].
    #[inline]
    pub fn weight(&self, index: usize) -> f64 {
        let m = self.qubit2.len();
        self.qubit1[index / m].0 * self.qubit2[index % m].0
    }

    pub fn integrate_unitary(&self, u: &ComplexMatrix, eps: f64) -> Result<MeanPsfEstimate> {
        let kernel = PureProductKernel::new(u)?;
        // the factor 2 between (ρ)₀₁ and the phase projection cancels in f
        let half_eps = 0.5 * eps;
        let e2 = half_eps * half_eps;
        let partials: Vec<(f64, u64)> = self
            .qubit1
            .par_iter()
            .map(|(w1, a)| {
                let v = kernel.partial_image(*a);
                let (v0r, v0i) = (v[0].map(|z| z.re), v[0].map(|z| z.im));
                let (v1r, v1i) = (v[1].map(|z| z.re), v[1].map(|z| z.im));
                let mut sum = 0.0;
                let mut undefined = 0;
                for (w2, b) in &self.qubit2 {
                    // first amplitude is real
                    let (b0, b1r, b1i) = (b[0].re, b[1].re, b[1].im);
                    let mut pr = [0.0; 4];
                    let mut pi = [0.0; 4];
                    for k in 0..4 {
                        pr[k] = v0r[k] * b0 + v1r[k] * b1r - v1i[k] * b1i;
                        pi[k] = v0i[k] * b0 + v1r[k] * b1i + v1i[k] * b1r;
                    }
                    let r1r = pr[0] * pr[2] + pi[0] * pi[2] + pr[1] * pr[3] + pi[1] * pi[3];
                    let r1i = pi[0] * pr[2] - pr[0] * pi[2] + pi[1] * pr[3] - pr[1] * pi[3];
                    let r2r = pr[0] * pr[1] + pi[0] * pi[1] + pr[2] * pr[3] + pi[2] * pi[3];
                    let r2i = pi[0] * pr[1] - pr[0] * pi[1] + pi[2] * pr[3] - pr[2] * pi[3];
                    let q1 = r1r * r1r + r1i * r1i;
                    let q2 = r2r * r2r + r2i * r2i;
                    if q1 <= e2 || q2 <= e2 {
                        undefined += 1;
                    } else {
                        let f = (r1r * r2r + r1i * r2i) / (q1 * q2).sqrt();
                        sum += w2 * f.clamp(-1.0, 1.0);
                    }
                }
                (w1 * sum, undefined)
            })
            .collect();
        Ok(self.fold(&partials))
    }

    fn fold(&self, partials: &[(f64, u64)]) -> MeanPsfEstimate {
        let (value, n_undefined) = partials.iter().fold((0.0, 0), |(s, u), (ps, pu)| (s + ps, u + pu));
        MeanPsfEstimate { value, std_error: 0.0, n_undefined, n_total: self.n_nodes() }
    }
}

#[inline(always)]
fn fidelity_xy(x1: f64, y1: f64, x2: f64, y2: f64, eps: f64) -> Option<f64> {
    let q1 = x1 * x1 + y1 * y1;
    let q2 = x2 * x2 + y2 * y2;
    let e2 = eps * eps;
    if q1 <= e2 || q2 <= e2 {
        None
    } else {
        Some(((x1 * x2 + y1 * y2) / (q1 * q2).sqrt()).clamp(-1.0, 1.0))
    }
}

/// Quadrature outputs of the entangling core `U_c(α,β,γ)`, reusable for
/// any final local layer: local rotations act on the cached Bloch vectors
/// as 3×3 rotations.
#[derive(Debug, Clone)]
pub struct CoreOutputs {
    core: [f64; 3],
    weights: Vec<f64>,
    bloch: Vec<(BlochVector, BlochVector)>,
    n_total: u64,
}

impl CoreOutputs {
    pub fn new(rule: &QuadratureRule, core: [f64; 3]) -> Self {
        let bloch = rule
            .output_bloch(&u_c(core[0], core[1], core[2]))
            .expect("U_c is a two-qubit unitary");
        let weights = (0..bloch.len()).map(|i| rule.weight(i)).collect();
        Self { core, weights, bloch, n_total: rule.n_nodes() }
    }

    pub fn core(&self) -> [f64; 3] {
        self.core
    }

    /// Mean PSF for the full angle vector; its first three entries are
    /// ignored in favour of the cached core.
    pub fn mean_with_locals(&self, angles: &[f64; 8], eps: f64) -> MeanPsfEstimate {
        let (w1, w2) = local_layer(angles);
        let (r1, r2) = (adjoint_action(&w1), adjoint_action(&w2));
        const CHUNK: usize = 4096;
        let partials: Vec<(f64, u64)> = self
            .bloch
            .par_chunks(CHUNK)
            .zip(self.weights.par_chunks(CHUNK))
            .map(|(nodes, weights)| {
                let mut sum = 0.0;
                let mut undefined = 0;
                for ((n1, n2), w) in nodes.iter().zip(weights) {
                    let x1 = r1[0][0] * n1.x + r1[0][1] * n1.y + r1[0][2] * n1.z;
                    let y1 = r1[1][0] * n1.x + r1[1][1] * n1.y + r1[1][2] * n1.z;
                    let x2 = r2[0][0] * n2.x + r2[0][1] * n2.y + r2[0][2] * n2.z;
                    let y2 = r2[1][0] * n2.x + r2[1][1] * n2.y + r2[1][2] * n2.z;
                    match fidelity_xy(x1, y1, x2, y2, eps) {
                        Some(f) => sum += w * f,
                        None => undefined += 1,
                    }
                }
                (sum, undefined)
            })
            .collect();
        let (value, n_undefined) = partials.iter().fold((0.0, 0), |(s, u), (ps, pu)| (s + ps, u + pu));
        MeanPsfEstimate { value, std_error: 0.0, n_undefined, n_total: self.n_total }
    }
}

/// Mean PSF of an arbitrary two-qubit unitary by quadrature.
pub fn mean_psf_quadrature_unitary(u: &ComplexMatrix, order: usize, eps: f64) -> Result<MeanPsfEstimate> {
    QuadratureRule::new(order)?.integrate_unitary(u, eps)
}

/// Mean PSF of `U_g` from raw (unwrapped) angles.
pub fn mean_psf_quadrature_angles(angles: &[f64; 8], order: usize, eps: f64) -> Result<MeanPsfEstimate> {
    mean_psf_quadrature_unitary(&u_g_angles(angles), order, eps)
}

pub fn mean_psf_quadrature(params: &CircuitParams, order: usize, eps: f64) -> Result<MeanPsfEstimate> {
    mean_psf_quadrature_angles(&params.to_array(), order, eps)
}

/// Samples per Monte Carlo shard. Shard `k` draws from ChaCha stream `k`
/// of the seed, so the sample sequence is fixed by `(seed, n)` alone.
pub const SHARD_SIZE: u64 = 1 << 14;

/// One uniformly distributed pure product input.
#[derive(Debug, Clone, Copy)]
pub struct InputSample {
    pub cos_theta1: f64,
    pub phi1: f64,
    pub cos_theta2: f64,
    pub phi2: f64,
}

impl InputSample {
    pub fn draw(rng: &mut impl Rng) -> Self {
        Self {
            cos_theta1: rng.gen_range(-1.0..=1.0),
            phi1: rng.gen_range(0.0..TAU),
            cos_theta2: rng.gen_range(-1.0..=1.0),
            phi2: rng.gen_range(0.0..TAU),
        }
    }

    pub fn amplitudes(&self) -> ([C64; 2], [C64; 2]) {
        (amplitudes_from_cos(self.cos_theta1, self.phi1), amplitudes_from_cos(self.cos_theta2, self.phi2))
    }

    pub fn theta1(&self) -> f64 {
        self.cos_theta1.clamp(-1.0, 1.0).acos()
    }

    pub fn theta2(&self) -> f64 {
        self.cos_theta2.clamp(-1.0, 1.0).acos()
    }
}

/// Runs `visit` over `n_samples` seeded inputs, one accumulator per shard,
/// and returns the accumulators in shard order.
pub fn sharded_samples<A, I, V>(n_samples: u64, seed: u64, init: I, visit: V) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &InputSample) + Sync,
{
    let n_shards = n_samples.div_ceil(SHARD_SIZE);
    (0..n_shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let len = SHARD_SIZE.min(n_samples - shard * SHARD_SIZE);
            let mut acc = init();
            for _ in 0..len {
                visit(&mut acc, &InputSample::draw(&mut rng));
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    undefined: u64,
    sum: f64,
    sum_sq: f64,
}

pub fn mean_psf_montecarlo_unitary(u: &ComplexMatrix, n_samples: u64, seed: u64, eps: f64) -> Result<MeanPsfEstimate> {
    if n_samples == 0 {
        return Err(invalid("Monte Carlo needs at least one sample"));
    }
    let kernel = PureProductKernel::new(u)?;
    let shards = sharded_samples(n_samples, seed, Moments::default, |m, s| {
        let (a, b) = s.amplitudes();
        let (n1, n2) = kernel.output_bloch(a, b);
        match fidelity_xy(n1.x, n1.y, n2.x, n2.y, eps) {
            Some(f) => {
                m.n += 1;
                m.sum += f;
                m.sum_sq += f * f;
            }
            None => m.undefined += 1,
        }
    });
    let total = shards.iter().fold(Moments::default(), |t, m| Moments {
        n: t.n + m.n,
        undefined: t.undefined + m.undefined,
        sum: t.sum + m.sum,
        sum_sq: t.sum_sq + m.sum_sq,
    });
    let (value, std_error) = if total.n == 0 {
        (0.0, f64::INFINITY)
    } else {
        let nf = total.n as f64;
        let mean = total.sum / nf;
        let var = if total.n > 1 { ((total.sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
        (mean, (var / nf).sqrt())
    };
    Ok(MeanPsfEstimate { value, std_error, n_undefined: total.undefined, n_total: n_samples })
}

pub fn mean_psf_montecarlo(params: &CircuitParams, n_samples: u64, seed: u64, eps: f64) -> Result<MeanPsfEstimate> {
    mean_psf_montecarlo_unitary(&u_g_angles(&params.to_array()), n_samples, seed, eps)
}

fn check_step(h: f64) -> Result<()> {
    if !(1e-6..=1e-3).contains(&h) {
        return Err(invalid(format!("finite-difference step {h} outside [1e-6, 1e-3]")));
    }
    Ok(())
}

/// Central-difference gradient of the quadrature mean over the eight raw
/// angles. Local-angle components reuse one cached core evaluation.
pub fn grad_mean_psf_rule(rule: &QuadratureRule, angles: &[f64; 8], h: f64, eps: f64) -> Result<[f64; 8]> {
    check_step(h)?;
    let mut grad = [0.0; 8];
    for (k, g) in grad.iter_mut().enumerate().take(3) {
        let (mut plus, mut minus) = (*angles, *angles);
        plus[k] += h;
        minus[k] -= h;
        let fp = rule.integrate_unitary(&u_g_angles(&plus), eps)?.value;
        let fm = rule.integrate_unitary(&u_g_angles(&minus), eps)?.value;
        *g = (fp - fm) / (2.0 * h);
    }
    let cache = CoreOutputs::new(rule, [angles[0], angles[1], angles[2]]);
    for (k, g) in grad.iter_mut().enumerate().skip(3) {
        let (mut plus, mut minus) = (*angles, *angles);
        plus[k] += h;
        minus[k] -= h;
        *g = (cache.mean_with_locals(&plus, eps).value - cache.mean_with_locals(&minus, eps).value) / (2.0 * h);
    }
    Ok(grad)
}

pub fn grad_mean_psf(params: &CircuitParams, order: usize, h: f64, eps: f64) -> Result<[f64; 8]> {
    grad_mean_psf_rule(&QuadratureRule::new(order)?, &params.to_array(), h, eps)
}
