//! Gate and circuit constructors.
//!
//! Products are written in operator order: the rightmost factor acts first.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{c, tensor_all, tensor_product, ComplexMatrix, MAX_QUBITS};
use crate::states::wrap_tau;

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_2x2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_2x2([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_2x2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]])
}

pub const X_AXIS: [f64; 3] = [1.0, 0.0, 0.0];
pub const Y_AXIS: [f64; 3] = [0.0, 1.0, 0.0];
pub const Z_AXIS: [f64; 3] = [0.0, 0.0, 1.0];

fn rotation_unchecked(axis: [f64; 3], angle: f64) -> ComplexMatrix {
    let (s, co) = (angle / 2.0).sin_cos();
    let [nx, ny, nz] = axis;
    // cos(a/2)·𝟙 − i sin(a/2)·n·σ
    ComplexMatrix::from_2x2([
        [c(co, -s * nz), c(-s * ny, -s * nx)],
        [c(s * ny, -s * nx), c(co, s * nz)],
    ])
}

/// `R_n(angle) = exp(-i angle/2 · n·σ)` for a unit axis `n`.
pub fn rotation(axis: [f64; 3], angle: f64) -> Result<ComplexMatrix> {
    let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !angle.is_finite() || (norm - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("rotation axis {axis:?} is not a unit vector")));
    }
    Ok(rotation_unchecked(axis, angle))
}

pub fn ry(angle: f64) -> ComplexMatrix {
    rotation_unchecked(Y_AXIS, angle)
}

pub fn rz(angle: f64) -> ComplexMatrix {
    rotation_unchecked(Z_AXIS, angle)
}

/// The 3×3 rotation `R̃` induced on Bloch vectors by conjugation with
/// `R_n(angle)`: `R̃_ij = ½ tr(σ_i R σ_j R†)`.
pub fn bloch_rotation(axis: [f64; 3], angle: f64) -> Result<[[f64; 3]; 3]> {
    let r = rotation(axis, angle)?;
    Ok(adjoint_action(&r))
}

pub(crate) fn adjoint_action(r: &ComplexMatrix) -> [[f64; 3]; 3] {
    let sig = [pauli_x(), pauli_y(), pauli_z()];
    let rd = r.adjoint();
    let mut out = [[0.0; 3]; 3];
    for (j, sj) in sig.iter().enumerate() {
        let rot = &(r * sj) * &rd;
        for (i, si) in sig.iter().enumerate() {
            out[i][j] = 0.5 * (si * &rot).trace().re;
        }
    }
    out
}

/// CNOT on an `n_qubits` register with 0-based `control` and `target`
/// (qubit 0 is the leftmost factor).
pub fn cnot(control: usize, target: usize, n_qubits: usize) -> Result<ComplexMatrix> {
    if !(2..=MAX_QUBITS).contains(&n_qubits) {
        return Err(invalid(format!("n_qubits {n_qubits} outside 2..={MAX_QUBITS}")));
    }
    if control == target || control >= n_qubits || target >= n_qubits {
        return Err(invalid(format!("bad CNOT indices control={control} target={target} for {n_qubits} qubits")));
    }
    let dim = 1usize << n_qubits;
    let cbit = 1 << (n_qubits - 1 - control);
    let tbit = 1 << (n_qubits - 1 - target);
    Ok(ComplexMatrix::from_fn(dim, |i, j| {
        let image = if j & cbit != 0 { j ^ tbit } else { j };
        if i == image {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    }))
}

/// C₁₂ on two qubits.
pub fn c12() -> ComplexMatrix {
    cnot(0, 1, 2).expect("valid indices")
}

/// C₂₁ on two qubits.
pub fn c21() -> ComplexMatrix {
    cnot(1, 0, 2).expect("valid indices")
}

/// Entangling core `U_c = C₂₁ (𝟙⊗R_y(β)) C₁₂ (R_z(γ)⊗R_y(α)) C₂₁`.
pub fn u_c(alpha: f64, beta: f64, gamma: f64) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let (cnot12, cnot21) = (c12(), c21());
    let mid = tensor_product(&id, &ry(beta));
    let first = tensor_product(&rz(gamma), &ry(alpha));
    &(&(&(&cnot21 * &mid) * &cnot12) * &first) * &cnot21
}

/// Eight angles of the search family `U_g`, each reduced into `[0, 2π)`.
///
/// Field order matches the `a,b,g,m1,m2,n1,n2,s1` command-line layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub sigma1: f64,
}

impl CircuitParams {
    pub const LEN: usize = 8;
    pub const NAMES: [&'static str; 8] = ["alpha", "beta", "gamma", "mu1", "mu2", "nu1", "nu2", "sigma1"];

    pub fn zeros() -> Self {
        Self::from_array([0.0; 8])
    }

    /// `U_max`: α=3π/4, β=π/4, γ=π/4, μ₁=π/2, everything else 0.
    pub fn u_max() -> Self {
        Self::from_array([3.0 * FRAC_PI_4, FRAC_PI_4, FRAC_PI_4, FRAC_PI_2, 0.0, 0.0, 0.0, 0.0])
    }

    /// Only the core angles set; local rotations are identities.
    pub fn core(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self::from_array([alpha, beta, gamma, 0.0, 0.0, 0.0, 0.0, 0.0])
    }

    /// Canonicalizes every angle into `[0, 2π)`. Panics on non-finite input.
    pub fn from_array(a: [f64; 8]) -> Self {
        assert!(a.iter().all(|v| v.is_finite()), "circuit angles must be finite");
        let w = a.map(wrap_tau);
        Self {
            alpha: w[0],
            beta: w[1],
            gamma: w[2],
            mu1: w[3],
            mu2: w[4],
            nu1: w[5],
            nu2: w[6],
            sigma1: w[7],
        }
    }

    pub fn try_from_slice(v: &[f64]) -> Result<Self> {
        let arr: [f64; 8] = v
            .try_into()
            .map_err(|_| invalid(format!("expected 8 circuit angles, got {}", v.len())))?;
        if arr.iter().any(|x| !x.is_finite()) {
            return Err(invalid("circuit angles must be finite"));
        }
        Ok(Self::from_array(arr))
    }

    pub fn to_array(&self) -> [f64; 8] {
        [self.alpha, self.beta, self.gamma, self.mu1, self.mu2, self.nu1, self.nu2, self.sigma1]
    }

    pub fn with_sigma1(mut self, sigma1: f64) -> Self {
        self.sigma1 = wrap_tau(sigma1);
        self
    }
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self::u_max()
    }
}

/// Final local layer `W₁ = R_z(σ₁)R_y(ν₁)R_z(μ₁)`, `W₂ = R_y(ν₂)R_z(μ₂)`.
pub fn local_layer(angles: &[f64; 8]) -> (ComplexMatrix, ComplexMatrix) {
    let [_, _, _, mu1, mu2, nu1, nu2, sigma1] = *angles;
    let w1 = &(&rz(sigma1) * &ry(nu1)) * &rz(mu1);
    let w2 = &ry(nu2) * &rz(mu2);
    (w1, w2)
}

/// `U_g = (W₁⊗W₂)·U_c(α,β,γ)` from raw (not necessarily canonical) angles.
pub fn u_g_angles(angles: &[f64; 8]) -> ComplexMatrix {
    let (w1, w2) = local_layer(angles);
    &tensor_product(&w1, &w2) * &u_c(angles[0], angles[1], angles[2])
}

pub fn u_g(params: &CircuitParams) -> ComplexMatrix {
    u_g_angles(&params.to_array())
}

/// `W_sync,n · C₁₂ C₁₃ … C₁ₙ` with `W_sync,n = R_axis(angle)^{⊗n}`.
///
/// Synchronizes the phases of qubits 2..n (prepared in |0⟩) with qubit 1.
/// A rotation that fixes the z-axis leaves every phase undefined.
pub fn blank_sync_circuit(n_qubits: usize, axis: [f64; 3], angle: f64) -> Result<ComplexMatrix> {
    if !(2..=MAX_QUBITS).contains(&n_qubits) {
        return Err(invalid(format!("blank sync needs 2..={MAX_QUBITS} qubits, got {n_qubits}")));
    }
    let r = rotation(axis, angle)?;
    let w = tensor_all(std::iter::repeat_n(&r, n_qubits));
    let mut u = w;
    for target in 1..n_qubits {
        u = &u * &cnot(0, target, n_qubits)?;
    }
    Ok(u)
}

/// Default synchronizing rotation: R_y(π/2), mapping ê_z onto ê_x.
pub fn default_blank_sync(n_qubits: usize) -> Result<ComplexMatrix> {
    blank_sync_circuit(n_qubits, Y_AXIS, FRAC_PI_2)
}
