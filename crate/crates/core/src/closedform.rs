//! Closed-form Bloch vectors used as oracles for the matrix simulation.
//!
//! Everything here is an independent trigonometric evaluation; nothing calls
//! into the matrix path.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use crate::gates::CircuitParams;
use crate::states::BlochVector;

/// Reduced Bloch vectors of both qubits after `U_c(α,β,γ)` acting on the pure
/// product state with angles `(θ₁,φ₁)`, `(θ₂,φ₂)`.
#[allow(clippy::too_many_arguments)]
pub fn bloch_after_uc(
    theta1: f64,
    theta2: f64,
    phi1: f64,
    phi2: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> (BlochVector, BlochVector) {
    let (st1, ct1) = theta1.sin_cos();
    let (st2, ct2) = theta2.sin_cos();
    let (sp1, cp1) = phi1.sin_cos();
    let (sp2, cp2) = phi2.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();

    let n1 = BlochVector::new(
        cg * (ca * st2 * cp2 + sa * st1 * ct2 * cp1) - sg * (ca * ct1 * st2 * sp2 + sa * st1 * sp1),
        sg * (cb * ct1 * st2 * cp2 - sb * st1 * cp1) + cg * (cb * st2 * sp2 - sb * st1 * ct2 * sp1),
        ca * (cb * ct2 + sb * st1 * st2 * sp1 * sp2) - sa * (cb * st1 * st2 * cp1 * cp2 + sb * ct1),
    );
    let n2 = BlochVector::new(
        cg * (cb * st1 * cp1 + sb * ct1 * st2 * cp2) - sg * (cb * st1 * ct2 * sp1 + sb * st2 * sp2),
        sg * (ca * st1 * ct2 * cp1 - sa * st2 * cp2) + cg * (ca * st1 * sp1 - sa * ct1 * st2 * sp2),
        ca * (cb * ct1 - sb * st1 * st2 * cp1 * cp2) + sa * (cb * st1 * st2 * sp1 * sp2 - sb * ct2),
    );
    (n1, n2)
}

/// Output Bloch vectors of `U_max` on two equatorial inputs with purities
/// `r₁, r₂` and phases `φ₁, φ₂`. The xy parts coincide and the z parts are
/// opposite, so the phases are perfectly synchronized.
pub fn equatorial_after_umax(r1: f64, r2: f64, phi1: f64, phi2: f64) -> (BlochVector, BlochVector) {
    let (s1, c1) = phi1.sin_cos();
    let (s2, c2) = phi2.sin_cos();
    let x = 0.5 * (r1 * c1 - r2 * s2);
    let y = 0.5 * (-r1 * s1 - r2 * c2);
    let z = -0.5 * r1 * r2 * (phi1 - phi2).cos();
    (BlochVector::new(x, y, z), BlochVector::new(x, y, -z))
}

/// The twelve input monomials `t_j(θ,φ)` shared by both expansions.
fn input_terms(theta1: f64, theta2: f64, phi1: f64, phi2: f64) -> [f64; 12] {
    let (st1, ct1) = theta1.sin_cos();
    let (st2, ct2) = theta2.sin_cos();
    let (sp1, cp1) = phi1.sin_cos();
    let (sp2, cp2) = phi2.sin_cos();
    [
        st1 * sp1,
        ct1 * st2 * sp2,
        st1 * ct2 * cp1,
        st2 * cp2,
        st1 * cp1,
        ct1 * st2 * cp2,
        st1 * ct2 * sp1,
        st2 * sp2,
        ct1,
        st1 * st2 * cp1 * cp2,
        st1 * st2 * sp1 * sp2,
        ct2,
    ]
}

/// Circuit coefficients `c_j` for weights `(a, b, c)` of the local layer.
fn circuit_coefficients(p: &CircuitParams, a: f64, b: f64, c: f64) -> [f64; 12] {
    let (sa, ca) = p.alpha.sin_cos();
    let (sb, cb) = p.beta.sin_cos();
    let (sg, cg) = p.gamma.sin_cos();
    [
        -a * sg * sa,
        -a * sg * ca,
        a * cg * sa,
        a * cg * ca,
        b * sg * sb,
        -b * sg * cb,
        b * cg * sb,
        -b * cg * cb,
        -c * sa * sb,
        -c * sa * cb,
        c * ca * sb,
        c * ca * cb,
    ]
}

/// `m₁ₓ` of `U_g(params)` as the twelve-term sum `Σ c_j t_j`.
pub fn m1x_expansion(theta1: f64, theta2: f64, phi1: f64, phi2: f64, params: &CircuitParams) -> f64 {
    let (sm, cm) = params.mu1.sin_cos();
    let (sn, cn) = params.nu1.sin_cos();
    let (ss, cs) = params.sigma1.sin_cos();
    let a = cm * cn * cs - sm * ss;
    let b = sm * cn * cs + cm * ss;
    let c = cs * sn;
    let coeffs = circuit_coefficients(params, a, b, c);
    let terms = input_terms(theta1, theta2, phi1, phi2);
    coeffs.iter().zip(terms.iter()).map(|(c, t)| c * t).sum()
}

/// `m₂ᵧ` of `U_g(params)` as the eight-term sum `Σ d_j t_j`, where the `d_j`
/// permute the `c_j` evaluated at `a = cos μ₂`, `b = sin μ₂`, `c = 0`.
/// Independent of `ν₂`.
pub fn m2y_expansion(theta1: f64, theta2: f64, phi1: f64, phi2: f64, params: &CircuitParams) -> f64 {
    let (sm, cm) = params.mu2.sin_cos();
    let c = circuit_coefficients(params, cm, sm, 0.0);
    let d = [c[3], -c[2], -c[1], c[0], -c[7], c[6], c[5], -c[4]];
    let terms = input_terms(theta1, theta2, phi1, phi2);
    d.iter().zip(terms.iter()).map(|(d, t)| d * t).sum()
}

/// Input `(θ₁, θ₂, φ₁, φ₂)` of a proof state, possibly depending on the core
/// angles `(α, β, γ)`.
pub type InputFn = fn(f64, f64, f64) -> [f64; 4];
pub type ExpectedFn = fn(f64, f64, f64) -> (BlochVector, BlochVector);

/// One of the 26 special inputs used in the impossibility argument, with the
/// Bloch vectors it produces under `U_c(α,β,γ)`.
///
/// The argument also defines the offsets
/// `δ = ±arctan(sin β / (cos α cos β))`, `δ₁ = −arctan(sin β / (cos α cos β))`
/// and `δ₂ = −arctan(cos α / (sin α sin β))`, the final-rotation angles that
/// would make a fixture's phase undefined. They only serve the case analysis
/// and are not computed here.
#[derive(Clone, Copy)]
pub struct ProofStateFixture {
    pub id: u8,
    pub input: InputFn,
    pub expected: ExpectedFn,
}

impl ProofStateFixture {
    pub fn input_at(&self, alpha: f64, beta: f64, gamma: f64) -> [f64; 4] {
        (self.input)(alpha, beta, gamma)
    }

    pub fn expected_at(&self, alpha: f64, beta: f64, gamma: f64) -> (BlochVector, BlochVector) {
        (self.expected)(alpha, beta, gamma)
    }
}

impl std::fmt::Debug for ProofStateFixture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProofStateFixture").field("id", &self.id).finish()
    }
}

fn v(x: f64, y: f64, z: f64) -> BlochVector {
    BlochVector::new(x, y, z)
}

fn fx(id: u8, input: InputFn, expected: ExpectedFn) -> ProofStateFixture {
    ProofStateFixture { id, input, expected }
}

/// All 26 proof states in catalog order.
///
/// Two inputs differ from a literal transcription: state 22 uses
/// `φ₁ = γ − π/2` and state 26 uses `θ₁ = θ₂ = 3π/4`, the values for which
/// the listed output vectors hold.
pub fn proof_state_catalog() -> Vec<ProofStateFixture> {
    const H: f64 = FRAC_PI_2;
    const Q: f64 = FRAC_PI_4;
    vec![
        fx(1, |_, _, _| [0.0, 0.0, 0.0, 0.0], |a, b, _| {
            let z = (a + b).cos();
            (v(0.0, 0.0, z), v(0.0, 0.0, z))
        }),
        fx(2, |_, _, _| [PI, 0.0, 0.0, 0.0], |a, b, _| {
            let z = (a - b).cos();
            (v(0.0, 0.0, z), v(0.0, 0.0, -z))
        }),
        fx(3, |_, _, _| [H, H, 0.0, H], |_, b, g| {
            let k = (b + g).cos();
            (v(0.0, k, 0.0), v(k, 0.0, 0.0))
        }),
        fx(4, |_, _, _| [H, H, PI, H], |_, b, g| {
            let k = (b - g).cos();
            (v(0.0, k, 0.0), v(-k, 0.0, 0.0))
        }),
        fx(5, |_, _, _| [H, H, H, 0.0], |a, _, g| {
            let k = (a + g).cos();
            (v(k, 0.0, 0.0), v(0.0, k, 0.0))
        }),
        fx(6, |_, _, _| [H, H, H, PI], |a, _, g| {
            let k = (a - g).cos();
            (v(-k, 0.0, 0.0), v(0.0, k, 0.0))
        }),
        fx(7, |_, _, g| [PI, H, 0.0, g], |a, b, _| {
            (v(a.cos(), 0.0, a.sin() * b.sin()), v(-b.sin(), 0.0, -a.cos() * b.cos()))
        }),
        fx(8, |_, _, g| [0.0, H, 0.0, -g], |a, b, _| {
            (v(a.cos(), 0.0, -a.sin() * b.sin()), v(b.sin(), 0.0, a.cos() * b.cos()))
        }),
        fx(9, |_, _, g| [0.0, H, 0.0, PI - g], |a, b, _| {
            (v(-a.cos(), 0.0, -a.sin() * b.sin()), v(-b.sin(), 0.0, a.cos() * b.cos()))
        }),
        fx(10, |_, _, g| [PI, H, 0.0, -PI + g], |a, b, _| {
            (v(-a.cos(), 0.0, a.sin() * b.sin()), v(b.sin(), 0.0, -a.cos() * b.cos()))
        }),
        fx(11, |_, _, g| [PI, H, 0.0, H + g], |a, b, _| {
            (v(0.0, b.cos(), a.sin() * b.sin()), v(0.0, a.sin(), -a.cos() * b.cos()))
        }),
        fx(12, |_, _, g| [0.0, H, 0.0, H - g], |a, b, _| {
            (v(0.0, b.cos(), -a.sin() * b.sin()), v(0.0, -a.sin(), a.cos() * b.cos()))
        }),
        fx(13, |_, _, g| [0.0, H, 0.0, -H - g], |a, b, _| {
            (v(0.0, -b.cos(), -a.sin() * b.sin()), v(0.0, a.sin(), a.cos() * b.cos()))
        }),
        fx(14, |_, _, g| [PI, H, 0.0, -H + g], |a, b, _| {
            (v(0.0, -b.cos(), a.sin() * b.sin()), v(0.0, -a.sin(), -a.cos() * b.cos()))
        }),
        fx(15, |_, _, g| [H, PI, g, 0.0], |a, b, _| {
            (v(-a.sin(), 0.0, -a.cos() * b.cos()), v(b.cos(), 0.0, a.sin() * b.sin()))
        }),
        fx(16, |_, _, g| [H, 0.0, -g, 0.0], |a, b, _| {
            (v(a.sin(), 0.0, a.cos() * b.cos()), v(b.cos(), 0.0, -a.sin() * b.sin()))
        }),
        fx(17, |_, _, g| [H, 0.0, PI - g, 0.0], |a, b, _| {
            (v(-a.sin(), 0.0, a.cos() * b.cos()), v(-b.cos(), 0.0, -a.sin() * b.sin()))
        }),
        fx(18, |_, _, g| [H, PI, PI + g, 0.0], |a, b, _| {
            (v(a.sin(), 0.0, -a.cos() * b.cos()), v(-b.cos(), 0.0, a.sin() * b.sin()))
        }),
        fx(19, |_, _, g| [H, PI, H + g, 0.0], |a, b, _| {
            (v(0.0, b.sin(), -a.cos() * b.cos()), v(0.0, a.cos(), a.sin() * b.sin()))
        }),
        fx(20, |_, _, g| [H, 0.0, H - g, 0.0], |a, b, _| {
            (v(0.0, -b.sin(), a.cos() * b.cos()), v(0.0, a.cos(), -a.sin() * b.sin()))
        }),
        fx(21, |_, _, g| [H, 0.0, -H - g, 0.0], |a, b, _| {
            (v(0.0, b.sin(), a.cos() * b.cos()), v(0.0, -a.cos(), -a.sin() * b.sin()))
        }),
        fx(22, |_, _, g| [H, PI, -H + g, 0.0], |a, b, _| {
            (v(0.0, -b.sin(), -a.cos() * b.cos()), v(0.0, -a.cos(), a.sin() * b.sin()))
        }),
        fx(23, |_, _, _| [H, H, Q, Q], |a, b, g| {
            (
                v((a + g).cos() * FRAC_1_SQRT_2, (b + g).cos() * FRAC_1_SQRT_2, -(a - b).sin() / 2.0),
                v((b + g).cos() * FRAC_1_SQRT_2, (a + g).cos() * FRAC_1_SQRT_2, (a - b).sin() / 2.0),
            )
        }),
        fx(24, |_, _, _| [H, H, 5.0 * Q, 7.0 * Q], |a, b, g| {
            (
                v((a - g).cos() * FRAC_1_SQRT_2, -(b + g).cos() * FRAC_1_SQRT_2, (a + b).sin() / 2.0),
                v(-(b + g).cos() * FRAC_1_SQRT_2, -(a - g).cos() * FRAC_1_SQRT_2, (a + b).sin() / 2.0),
            )
        }),
        fx(25, |_, _, _| [Q, Q, 0.0, 0.0], |a, b, g| {
            let (sa, ca) = a.sin_cos();
            let (sb, cb) = b.sin_cos();
            let (sg, cg) = g.sin_cos();
            let zc = SQRT_2 * (a + b).cos();
            (
                v(0.5 * cg * (SQRT_2 * ca + sa), 0.5 * sg * (cb - SQRT_2 * sb), 0.5 * (zc - cb * sa)),
                v(0.5 * cg * (SQRT_2 * cb + sb), 0.5 * sg * (ca - SQRT_2 * sa), 0.5 * (zc - ca * sb)),
            )
        }),
        fx(26, |_, _, _| [3.0 * Q, 3.0 * Q, PI, 0.0], |a, b, g| {
            let (sa, ca) = a.sin_cos();
            let (sb, cb) = b.sin_cos();
            let (sg, cg) = g.sin_cos();
            let zc = SQRT_2 * (a + b).cos();
            (
                v(0.5 * cg * (SQRT_2 * ca + sa), -0.5 * sg * (cb - SQRT_2 * sb), 0.5 * (-zc + cb * sa)),
                v(-0.5 * cg * (SQRT_2 * cb + sb), 0.5 * sg * (ca - SQRT_2 * sa), 0.5 * (-zc + ca * sb)),
            )
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{u_c, u_g};
    use crate::psf::PureProductKernel;
    use crate::states::PureAngles;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn amplitudes(theta: f64, phi: f64) -> [crate::linalg::C64; 2] {
        PureAngles::new(theta, phi).unwrap().amplitudes()
    }

    #[test]
    fn state_one_and_seven() {
        let (a, b, g) = (0.4, 1.2, 2.5);
        let (n1, n2) = bloch_after_uc(0.0, 0.0, 0.3, 1.1, a, b, g);
        assert!(n1.max_abs_diff(&v(0.0, 0.0, (a + b).cos())) < 1e-14);
        assert!(n2.max_abs_diff(&v(0.0, 0.0, (a + b).cos())) < 1e-14);
        let (n1, n2) = bloch_after_uc(PI, FRAC_PI_2, 0.0, g, a, b, g);
        assert!(n1.max_abs_diff(&v(a.cos(), 0.0, a.sin() * b.sin())) < 1e-14);
        assert!(n2.max_abs_diff(&v(-b.sin(), 0.0, -a.cos() * b.cos())) < 1e-14);
    }

    #[test]
    fn equatorial_display_values() {
        let (n1, n2) = equatorial_after_umax(1.0, 1.0, 0.0, 0.0);
        assert!(n1.max_abs_diff(&v(0.5, -0.5, -0.5)) < 1e-15);
        assert!(n2.max_abs_diff(&v(0.5, -0.5, 0.5)) < 1e-15);
        let (n1, n2) = equatorial_after_umax(0.6, 0.0, 1.0, 2.0);
        let expected = v(0.3 * 1f64.cos(), -0.3 * 1f64.sin(), 0.0);
        assert!(n1.max_abs_diff(&expected) < 1e-15 && n2.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn expansions_special_cases() {
        let (t1, t2, p1, p2) = (0.7, 1.9, 2.2, 4.0);
        let zero = CircuitParams::zeros();
        assert!((m1x_expansion(t1, t2, p1, p2, &zero) - t2.sin() * p2.cos()).abs() < 1e-14);
        assert!((m2y_expansion(t1, t2, p1, p2, &zero) - t1.sin() * p1.sin()).abs() < 1e-14);
        // σ₁ = π/2 removes the last four terms
        let p = CircuitParams::from_array([0.3, 1.1, 2.0, 0.4, 0.9, 1.7, 0.2, FRAC_PI_2]);
        let sm = p.mu1.sin() * p.nu1.cos() * p.sigma1.cos() + p.mu1.cos() * p.sigma1.sin();
        let am = p.mu1.cos() * p.nu1.cos() * p.sigma1.cos() - p.mu1.sin() * p.sigma1.sin();
        let c = circuit_coefficients(&p, am, sm, 0.0);
        let t = input_terms(t1, t2, p1, p2);
        let first8: f64 = (0..8).map(|j| c[j] * t[j]).sum();
        assert!((m1x_expansion(t1, t2, p1, p2, &p) - first8).abs() < 1e-14);
    }

    #[test]
    fn closed_forms_match_matrix_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..300 {
            let (t1, t2) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..PI));
            let (p1, p2) = (rng.gen_range(0.0..7.0), rng.gen_range(0.0..7.0));
            let core: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()].map(|x: f64| x * 7.0);
            let k = PureProductKernel::new(&u_c(core[0], core[1], core[2])).unwrap();
            let (m1, m2) = k.output_bloch(amplitudes(t1, p1), amplitudes(t2, p2));
            let (c1, c2) = bloch_after_uc(t1, t2, p1, p2, core[0], core[1], core[2]);
            assert!(m1.max_abs_diff(&c1) < 1e-12 && m2.max_abs_diff(&c2) < 1e-12);

            let params = CircuitParams::from_array([0; 8].map(|_| rng.gen_range(0.0..7.0)));
            let k = PureProductKernel::new(&u_g(&params)).unwrap();
            let (m1, m2) = k.output_bloch(amplitudes(t1, p1), amplitudes(t2, p2));
            assert!((m1x_expansion(t1, t2, p1, p2, &params) - m1.x).abs() < 1e-12);
            assert!((m2y_expansion(t1, t2, p1, p2, &params) - m2.y).abs() < 1e-12);
        }
    }

    #[test]
    fn catalog_matches_matrix_path() {
        let catalog = proof_state_catalog();
        assert_eq!(catalog.len(), 26);
        assert!(catalog.iter().enumerate().all(|(i, f)| f.id as usize == i + 1));
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let (a, b, g) = (rng.gen_range(0.0..7.0), rng.gen_range(0.0..7.0), rng.gen_range(0.0..7.0));
            let k = PureProductKernel::new(&u_c(a, b, g)).unwrap();
            for f in &catalog {
                let [t1, t2, p1, p2] = f.input_at(a, b, g);
                let (m1, m2) = k.output_bloch(amplitudes(t1, p1), amplitudes(t2, p2));
                let (e1, e2) = f.expected_at(a, b, g);
                assert!(m1.max_abs_diff(&e1) < 1e-12, "state {} qubit 1", f.id);
                assert!(m2.max_abs_diff(&e2) < 1e-12, "state {} qubit 2", f.id);
            }
        }
    }

    #[test]
    fn state_one_vanishes_when_alpha_plus_beta_is_odd_quarter_turn() {
        let f = &proof_state_catalog()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..100 {
            let a = rng.gen_range(0.0..7.0);
            let n = rng.gen_range(-3..4) as f64;
            let b = FRAC_PI_2 + n * PI - a;
            let (n1, n2) = f.expected_at(a, b, 0.0);
            assert!(n1.norm() < 1e-12 && n2.norm() < 1e-12);
        }
    }
}
