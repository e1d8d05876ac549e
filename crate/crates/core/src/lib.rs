//! Quantum-phase synchronization (QPS) of qubits under unitary circuits.
//!
//! The crate computes the phase-synchronization fidelity (PSF) between the
//! two reduced output states of a two-qubit unitary, averages it over
//! uniformly distributed pure product inputs, and searches the
//! eight-parameter circuit family [`gates::u_g`] for the optimal average.
//!
//! Conventions used throughout:
//!
//! * qubit 1 is the leftmost tensor factor (the slow index of a
//!   Kronecker product), so `cnot(0, 1, 2)` is C₁₂ with qubit 1 as control;
//! * written operator products act right to left;
//! * `R_n(a) = exp(-i a/2 n·σ)`.

pub mod average;
pub mod closedform;
pub mod error;
pub mod gates;
pub mod linalg;
pub mod optimize;
pub mod psf;
pub mod states;

pub use error::{Error, Result};
pub use gates::CircuitParams;
pub use linalg::ComplexMatrix;
pub use psf::PsfValue;
pub use states::{BlochVector, PhaseProjection, PureAngles};

/// Structural tolerance for unitarity / Hermiticity checks.
pub const STRUCT_TOL: f64 = 1e-12;

/// Default threshold below which a projected Bloch norm makes the phase undefined.
pub const DEFAULT_EPS_PHASE: f64 = 1e-9;
