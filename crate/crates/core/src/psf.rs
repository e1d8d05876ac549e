//! Phase fidelity, phase-synchronization fidelity (PSF), relative phase and
//! concurrence.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{c, hermitian_eigen, partial_trace, singular_values, tensor_product, ComplexMatrix, C64};
use crate::states::{bloch_vector, BlochVector, PhaseProjection};

/// Outcome of a phase comparison. `value` is `None` when either phase is
/// undefined, i.e. a projected norm is at most the phase threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsfValue {
    pub value: Option<f64>,
    pub m_norms: (f64, f64),
}

impl PsfValue {
    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }
}

/// `f = m₁·m₂ / (‖m₁‖‖m₂‖)` from the two phase projections.
pub fn fidelity_from_projections(m1: PhaseProjection, m2: PhaseProjection, eps: f64) -> PsfValue {
    let (n1, n2) = (m1.norm(), m2.norm());
    let value = if n1 <= eps || n2 <= eps {
        None
    } else {
        Some((m1.dot(&m2) / (n1 * n2)).clamp(-1.0, 1.0))
    };
    PsfValue { value, m_norms: (n1, n2) }
}

pub fn fidelity_from_bloch(n1: &BlochVector, n2: &BlochVector, eps: f64) -> PsfValue {
    fidelity_from_projections(n1.projection(), n2.projection(), eps)
}

/// Signed angle from `m₁` to `m₂` in `(-π, π]`.
pub fn relative_phase_from_projections(m1: PhaseProjection, m2: PhaseProjection, eps: f64) -> Option<f64> {
    if m1.norm() <= eps || m2.norm() <= eps {
        return None;
    }
    let angle = m1.cross(&m2).atan2(m1.dot(&m2));
    Some(if angle <= -PI { PI } else { angle })
}

pub fn phase_fidelity(rho1: &ComplexMatrix, rho2: &ComplexMatrix, eps: f64) -> Result<PsfValue> {
    Ok(fidelity_from_bloch(&bloch_vector(rho1)?, &bloch_vector(rho2)?, eps))
}

pub fn relative_phase(rho1: &ComplexMatrix, rho2: &ComplexMatrix, eps: f64) -> Result<Option<f64>> {
    let (n1, n2) = (bloch_vector(rho1)?, bloch_vector(rho2)?);
    Ok(relative_phase_from_projections(n1.projection(), n2.projection(), eps))
}

fn check_two_qubit_unitary(u: &ComplexMatrix) -> Result<()> {
    if u.dim() != 4 {
        return Err(invalid(format!("expected a 4x4 unitary, got {0}x{0}", u.dim())));
    }
    if !u.is_unitary(1e-10) {
        return Err(invalid("circuit matrix is not unitary"));
    }
    Ok(())
}

/// Both reduced Bloch vectors of `U ρ U†`.
pub fn output_bloch_pair(rho_in: &ComplexMatrix, u: &ComplexMatrix) -> Result<(BlochVector, BlochVector)> {
    check_two_qubit_unitary(u)?;
    if rho_in.dim() != 4 {
        return Err(invalid("expected a two-qubit input state"));
    }
    let out = u.conjugate(rho_in)?;
    let n1 = bloch_vector(&partial_trace(&out, &[0], 2)?)?;
    let n2 = bloch_vector(&partial_trace(&out, &[1], 2)?)?;
    Ok((n1, n2))
}

/// `F(ρ, U) = f(ρ₁′, ρ₂′)`.
pub fn psf(rho_in: &ComplexMatrix, u: &ComplexMatrix, eps: f64) -> Result<PsfValue> {
    let (n1, n2) = output_bloch_pair(rho_in, u)?;
    Ok(fidelity_from_bloch(&n1, &n2, eps))
}

/// PSF of a product of two single-qubit states.
pub fn psf_product(rho1: &ComplexMatrix, rho2: &ComplexMatrix, u: &ComplexMatrix, eps: f64) -> Result<PsfValue> {
    if rho1.dim() != 2 || rho2.dim() != 2 {
        return Err(invalid("product factors must be single-qubit states"));
    }
    psf(&tensor_product(rho1, rho2), u, eps)
}

/// Phase fidelity of every qubit pair `(i, j)`, `i < j`, of an n-qubit state.
pub fn pairwise_phase_fidelities(rho: &ComplexMatrix, eps: f64) -> Result<Vec<((usize, usize), PsfValue)>> {
    let n = rho.n_qubits();
    let bloch: Vec<BlochVector> = (0..n)
        .map(|q| partial_trace(rho, &[q], n).and_then(|r| bloch_vector(&r)))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push(((i, j), fidelity_from_bloch(&bloch[i], &bloch[j], eps)));
        }
    }
    Ok(out)
}

/// Wootters concurrence of a two-qubit density matrix.
///
/// With `ρ = Σ vᵢvᵢ†` (`vᵢ = √λᵢ eᵢ`), the singular values of the complex
/// symmetric matrix `τᵢⱼ = vᵢᵀ(σ_y⊗σ_y)vⱼ` are the square roots of the
/// eigenvalues of `ρ(σ_y⊗σ_y)ρ*(σ_y⊗σ_y)`. This avoids square roots of tiny
/// negative eigenvalues of a non-Hermitian product.
pub fn concurrence(rho: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(invalid(format!("concurrence needs a 4x4 state, got {0}x{0}", rho.dim())));
    }
    let (vals, vecs) = hermitian_eigen(rho, 1e-10)?;
    let kept: Vec<[C64; 4]> = vals
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 1e-12)
        .map(|(k, &l)| {
            let s = l.sqrt();
            [0, 1, 2, 3].map(|i| vecs.get(i, k) * s)
        })
        .collect();
    // σ_y⊗σ_y maps (v₀,v₁,v₂,v₃) to (−v₃, v₂, v₁, −v₀).
    let flip = |v: &[C64; 4]| [-v[3], v[2], v[1], -v[0]];
    let k = kept.len();
    let mut tau = Vec::with_capacity(k * k);
    for vi in &kept {
        for vj in &kept {
            let fj = flip(vj);
            tau.push((0..4).map(|t| vi[t] * fj[t]).sum::<C64>());
        }
    }
    let mut s = singular_values(k, k, &tau);
    s.resize(4, 0.0);
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}

/// Fast path for pure product inputs `|a⟩⊗|b⟩` through a fixed two-qubit
/// unitary. Skips density matrices entirely.
#[derive(Debug, Clone, Copy)]
pub struct PureProductKernel {
    u: [[C64; 4]; 4],
}

/// `Σ_k a_k U[:, 2k+l]` for `l = 0, 1`: the circuit applied to `|a⟩⊗|l⟩`.
pub type PartialImage = [[C64; 4]; 2];

impl PureProductKernel {
    pub fn new(u: &ComplexMatrix) -> Result<Self> {
        check_two_qubit_unitary(u)?;
        let mut m = [[c(0.0, 0.0); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = u.get(i, j);
            }
        }
        Ok(Self { u: m })
    }

    #[inline]
    pub fn partial_image(&self, a: [C64; 2]) -> PartialImage {
        let mut v = [[c(0.0, 0.0); 4]; 2];
        for (l, vl) in v.iter_mut().enumerate() {
            for (i, e) in vl.iter_mut().enumerate() {
                *e = a[0] * self.u[i][l] + a[1] * self.u[i][2 + l];
            }
        }
        v
    }

    #[inline]
    pub fn output_bloch(&self, a: [C64; 2], b: [C64; 2]) -> (BlochVector, BlochVector) {
        output_from_partial(&self.partial_image(a), b)
    }
}

#[inline]
pub fn output_from_partial(v: &PartialImage, b: [C64; 2]) -> (BlochVector, BlochVector) {
    let psi = [0, 1, 2, 3].map(|i| v[0][i] * b[0] + v[1][i] * b[1]);
    bloch_from_amplitudes(&psi)
}

/// Reduced Bloch vectors of a two-qubit pure state given by its amplitudes.
#[inline]
pub fn bloch_from_amplitudes(psi: &[C64; 4]) -> (BlochVector, BlochVector) {
    let r1 = psi[0] * psi[2].conj() + psi[1] * psi[3].conj();
    let r2 = psi[0] * psi[1].conj() + psi[2] * psi[3].conj();
    let p = psi.map(|z| z.norm_sqr());
    (
        BlochVector::new(2.0 * r1.re, -2.0 * r1.im, p[0] + p[1] - p[2] - p[3]),
        BlochVector::new(2.0 * r2.re, -2.0 * r2.im, p[0] - p[1] + p[2] - p[3]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{c12, c21, default_blank_sync, rz, u_c, u_g, CircuitParams};
    use crate::states::{equatorial_state, mixed_state, pure_state, PureAngles};
    use crate::DEFAULT_EPS_PHASE as EPS;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn eq(phi: f64) -> ComplexMatrix {
        equatorial_state(1.0, phi).unwrap()
    }

    fn pure(t: f64, p: f64) -> ComplexMatrix {
        pure_state(PureAngles::new(t, p).unwrap())
    }

    fn random_pure(rng: &mut impl Rng) -> PureAngles {
        PureAngles::new(rng.gen_range(-1.0f64..1.0).acos(), rng.gen_range(0.0..2.0 * PI)).unwrap()
    }

    #[test]
    fn phase_fidelity_basics() {
        assert_eq!(phase_fidelity(&eq(0.3), &eq(0.3), EPS).unwrap().value, Some(1.0));
        assert!((phase_fidelity(&eq(0.0), &eq(PI), EPS).unwrap().value.unwrap() + 1.0).abs() < 1e-12);
        assert!(phase_fidelity(&eq(0.0), &eq(FRAC_PI_2), EPS).unwrap().value.unwrap().abs() < 1e-12);
        let v = phase_fidelity(&pure(0.0, 0.0), &eq(1.0), EPS).unwrap();
        assert!(!v.is_defined());
        assert!(v.m_norms.0 <= EPS);
    }

    #[test]
    fn relative_phase_basics() {
        assert_eq!(relative_phase(&eq(1.0), &eq(1.0), EPS).unwrap(), Some(0.0));
        let q = relative_phase(&eq(0.0), &eq(FRAC_PI_2), EPS).unwrap().unwrap();
        assert!((q - FRAC_PI_2).abs() < 1e-12);
        let h = relative_phase(&eq(0.0), &eq(PI), EPS).unwrap().unwrap();
        assert!((h - PI).abs() < 1e-12);
        assert_eq!(relative_phase(&pure(PI, 0.0), &eq(0.0), EPS).unwrap(), None);
    }

    #[test]
    fn fidelity_symmetric_and_consistent_with_relative_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..200 {
            let a = pure_state(random_pure(&mut rng));
            let b = mixed_state(random_pure(&mut rng), rng.gen_range(0.1..1.0)).unwrap();
            let f = phase_fidelity(&a, &b, EPS).unwrap().value.unwrap();
            assert!((f - phase_fidelity(&b, &a, EPS).unwrap().value.unwrap()).abs() < 1e-14);
            let d = relative_phase(&a, &b, EPS).unwrap().unwrap();
            assert!((d.cos() - f).abs() < 1e-12);
            // equal z-rotations of both states leave f unchanged
            let r = rz(rng.gen_range(0.0..7.0));
            let g = phase_fidelity(&r.conjugate(&a).unwrap(), &r.conjugate(&b).unwrap(), EPS).unwrap();
            assert!((g.value.unwrap() - f).abs() < 1e-12);
        }
    }

    #[test]
    fn psf_rejects_non_unitary() {
        let rho = tensor_product(&eq(0.0), &eq(0.0));
        assert!(psf(&rho, &ComplexMatrix::identity(4).scale(c(2.0, 0.0)), EPS).is_err());
        assert!(psf(&rho, &ComplexMatrix::identity(2), EPS).is_err());
    }

    #[test]
    fn psf_identity_on_equatorial_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let (p1, p2) = (rng.gen_range(0.0..7.0), rng.gen_range(0.0..7.0));
            let v = psf_product(&eq(p1), &eq(p2), &ComplexMatrix::identity(4), EPS).unwrap();
            assert!((v.value.unwrap() - (p2 - p1).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_equals_identity_and_rz_pi_flips_sign() {
        let swap = u_c(0.0, 0.0, 0.0);
        let p = CircuitParams::from_array([0.3, 1.1, 2.0, 0.4, 0.9, 1.7, 0.2, 0.6]);
        let ug = u_g(&p);
        let flipped = &tensor_product(&ComplexMatrix::identity(2), &rz(PI)) * &ug;
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let rho = tensor_product(&pure_state(random_pure(&mut rng)), &pure_state(random_pure(&mut rng)));
            let a = psf(&rho, &swap, EPS).unwrap().value.unwrap();
            let b = psf(&rho, &ComplexMatrix::identity(4), EPS).unwrap().value.unwrap();
            assert!((a - b).abs() < 1e-12);
            let f = psf(&rho, &ug, EPS).unwrap().value.unwrap();
            let g = psf(&rho, &flipped, EPS).unwrap().value.unwrap();
            assert!((f + g).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_matches_density_matrix_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let u = u_g(&CircuitParams::from_array([0.3, 1.1, 2.0, 0.4, 0.9, 1.7, 0.2, 0.6]));
        let kernel = PureProductKernel::new(&u).unwrap();
        for _ in 0..100 {
            let (a, b) = (random_pure(&mut rng), random_pure(&mut rng));
            let rho = tensor_product(&pure_state(a), &pure_state(b));
            let (n1, n2) = output_bloch_pair(&rho, &u).unwrap();
            let (k1, k2) = kernel.output_bloch(a.amplitudes(), b.amplitudes());
            assert!(n1.max_abs_diff(&k1) < 1e-13 && n2.max_abs_diff(&k2) < 1e-13);
        }
    }

    #[test]
    fn u_max_synchronizes_equatorial_inputs() {
        let u = u_g(&CircuitParams::u_max());
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..200 {
            let (r1, r2) = (rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0));
            let rho = tensor_product(
                &equatorial_state(r1, rng.gen_range(0.0..7.0)).unwrap(),
                &equatorial_state(r2, rng.gen_range(0.0..7.0)).unwrap(),
            );
            let (n1, n2) = output_bloch_pair(&rho, &u).unwrap();
            assert!((n1.x - n2.x).abs() < 1e-10 && (n1.y - n2.y).abs() < 1e-10);
            assert!((n1.z + n2.z).abs() < 1e-10);
            assert!((psf(&rho, &u, EPS).unwrap().value.unwrap() - 1.0).abs() < 1e-10);
        }
    }

    fn bell() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::projector(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap()
    }

    #[test]
    fn concurrence_basics() {
        assert!((concurrence(&bell()).unwrap() - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..50 {
            let rho = tensor_product(
                &mixed_state(random_pure(&mut rng), rng.gen_range(0.0..1.0)).unwrap(),
                &pure_state(random_pure(&mut rng)),
            );
            assert!(concurrence(&rho).unwrap() < 1e-10);
        }
        assert!(concurrence(&ComplexMatrix::identity(4).scale(c(0.25, 0.0))).unwrap() < 1e-12);
        // Werner state p·Bell + (1−p)𝟙/4 has C = max(0, (3p−1)/2)
        for p in [0.2, 0.5, 0.9] {
            let w = &bell().scale(c(p, 0.0)) + &ComplexMatrix::identity(4).scale(c((1.0 - p) / 4.0, 0.0));
            let expected = f64::max(0.0, (3.0 * p - 1.0) / 2.0);
            assert!((concurrence(&w).unwrap() - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn concurrence_of_pure_states_matches_spin_flip_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..100 {
            let mut psi: Vec<C64> = (0..4).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|z| *z /= norm);
            // C = |⟨ψ|σ_y⊗σ_y|ψ*⟩| = 2|ψ₀ψ₃ − ψ₁ψ₂|
            let expected = 2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm();
            let rho = ComplexMatrix::projector(&psi).unwrap();
            assert!((concurrence(&rho).unwrap() - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn concurrence_sign_convention_probe() {
        // φ₁=0.7, φ₂=0.4: sin(φ₂−φ₁) matches, sin(φ₁−φ₂) does not.
        let (p1, p2) = (0.7, 0.4);
        let rho = u_g(&CircuitParams::u_max()).conjugate(&tensor_product(&eq(p1), &eq(p2))).unwrap();
        let cval = concurrence(&rho).unwrap();
        assert!((cval - (1.0 + (p2 - p1).sin()) / 2.0).abs() < 1e-10);
        assert!((cval - (1.0 + (p1 - p2).sin()) / 2.0).abs() > 0.1);
    }

    #[test]
    fn blank_sync_two_and_three_qubits() {
        let w2 = default_blank_sync(2).unwrap();
        for phi in [0.0, 1.0, 4.0] {
            let rho = tensor_product(&pure(FRAC_PI_4, phi), &pure(0.0, 0.0));
            assert!((psf(&rho, &w2, EPS).unwrap().value.unwrap() - 1.0).abs() < 1e-12);
        }
        let rho = tensor_product(&pure(FRAC_PI_2, 0.3), &pure(0.0, 0.0));
        assert!(!psf(&rho, &w2, EPS).unwrap().is_defined());

        let w3 = default_blank_sync(3).unwrap();
        let blank = tensor_product(&pure(0.0, 0.0), &pure(0.0, 0.0));
        let rho = tensor_product(&mixed_state(PureAngles::new(PI / 3.0, 1.2).unwrap(), 0.8).unwrap(), &blank);
        let out = w3.conjugate(&rho).unwrap();
        let pairs = pairwise_phase_fidelities(&out, EPS).unwrap();
        assert_eq!(pairs.len(), 3);
        for (_, v) in pairs {
            assert!((v.value.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cnots_alone_leave_phase_undefined() {
        let u = &c21() * &c12();
        let rho = tensor_product(&pure(1.0, 0.5), &pure(0.0, 0.0));
        assert!(!psf(&rho, &c12(), EPS).unwrap().is_defined());
        assert!(psf(&rho, &u, EPS).unwrap().m_norms.0 < 1e-12);
    }
}
