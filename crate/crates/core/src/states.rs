//! Single-qubit state families and Bloch-vector extraction.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{c, partial_trace, ComplexMatrix, C64};
use crate::STRUCT_TOL;

/// Polar/azimuthal angles of a pure qubit state
/// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureAngles {
    theta: f64,
    phi: f64,
}

impl PureAngles {
    /// `theta` must lie in `[0, π]`; `phi` is reduced into `[0, 2π)`.
    /// At the poles the phase is a gauge and is stored as 0.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(invalid("state angles must be finite"));
        }
        if !(-1e-12..=PI + 1e-12).contains(&theta) {
            return Err(invalid(format!("theta {theta} outside [0, π]")));
        }
        let theta = theta.clamp(0.0, PI);
        let phi = if theta == 0.0 || theta == PI { 0.0 } else { wrap_tau(phi) };
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Ket amplitudes `[cos(θ/2), e^{iφ} sin(θ/2)]`.
    pub fn amplitudes(&self) -> [C64; 2] {
        let (s, co) = (self.theta / 2.0).sin_cos();
        [c(co, 0.0), C64::from_polar(s, self.phi)]
    }

    pub fn bloch(&self) -> BlochVector {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        BlochVector::new(st * cp, st * sp, ct)
    }

    /// Recovers the angles of a nonzero Bloch vector's direction.
    pub fn from_bloch(n: &BlochVector) -> Result<Self> {
        let r = n.norm();
        if r <= STRUCT_TOL {
            return Err(invalid("zero Bloch vector has no direction"));
        }
        Self::new((n.z / r).clamp(-1.0, 1.0).acos(), n.y.atan2(n.x))
    }
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle into `(-π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let r = wrap_tau(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn projection(&self) -> PhaseProjection {
        PhaseProjection { mx: self.x, my: self.y }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// Applies a 3×3 matrix (row-major).
    pub fn transformed(&self, m: &[[f64; 3]; 3]) -> Self {
        let v = self.as_array();
        let row = |r: &[f64; 3]| r[0] * v[0] + r[1] * v[1] + r[2] * v[2];
        Self::new(row(&m[0]), row(&m[1]), row(&m[2]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs()).max((self.z - other.z).abs())
    }
}

impl From<[f64; 3]> for BlochVector {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// Equatorial (xy) part of a Bloch vector; its azimuth is the quantum phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseProjection {
    pub mx: f64,
    pub my: f64,
}

impl PhaseProjection {
    pub fn norm(&self) -> f64 {
        self.mx.hypot(self.my)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.mx * other.mx + self.my * other.my
    }

    /// z-component of the 2D cross product.
    pub fn cross(&self, other: &Self) -> f64 {
        self.mx * other.my - self.my * other.mx
    }
}

/// `|ψ⟩⟨ψ|` for the state with the given angles.
pub fn pure_state(angles: PureAngles) -> ComplexMatrix {
    ComplexMatrix::projector(&angles.amplitudes()).expect("length 2")
}

/// `(𝟙 + n·σ)/2`.
pub fn from_bloch(n: &BlochVector) -> ComplexMatrix {
    ComplexMatrix::from_2x2([
        [c((1.0 + n.z) / 2.0, 0.0), c(n.x / 2.0, -n.y / 2.0)],
        [c(n.x / 2.0, n.y / 2.0), c((1.0 - n.z) / 2.0, 0.0)],
    ])
}

/// `n_k = tr(σ_k ρ)` for a single-qubit density matrix.
pub fn bloch_vector(rho: &ComplexMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(invalid(format!("expected a 2x2 density matrix, got {0}x{0}", rho.dim())));
    }
    if !rho.is_hermitian(1e-10) {
        return Err(invalid("density matrix is not Hermitian"));
    }
    let r01 = rho.get(0, 1);
    Ok(BlochVector::new(
        2.0 * r01.re,
        -2.0 * r01.im,
        (rho.get(0, 0) - rho.get(1, 1)).re,
    ))
}

/// `(1−p)·𝟙/2 + p·|ψ⟩⟨ψ|`.
pub fn mixed_state(angles: PureAngles, p: f64) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("purity weight {p} outside [0, 1]")));
    }
    Ok(from_bloch(&angles.bloch().scaled(p)))
}

/// State with Bloch vector `r (cos φ, sin φ, 0)`.
pub fn equatorial_state(r: f64, phi: f64) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid(format!("purity {r} outside [0, 1]")));
    }
    let (s, co) = phi.sin_cos();
    Ok(from_bloch(&BlochVector::new(r * co, r * s, 0.0)))
}

/// Bloch vectors of every single-qubit marginal of an n-qubit state.
pub fn reduced_bloch_vectors(rho: &ComplexMatrix) -> Result<Vec<BlochVector>> {
    let n = rho.n_qubits();
    (0..n)
        .map(|q| partial_trace(rho, &[q], n).and_then(|r| bloch_vector(&r)))
        .collect()
}
