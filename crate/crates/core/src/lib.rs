//! Decoherence-free-subspace quantum computation with neutral atoms coupled to
//! an optical cavity.
//!
//! * [`qsim`]: seeded dense state engine (state vectors, density matrices,
//!   projective measurement, partial trace).
//! * [`logical`]: the two-atom encoding `|0_L⟩ = |01⟩`, `|1_L⟩ = |10⟩` and
//!   logical single-qubit operations and measurements.
//! * [`cavity`]: linear input-output model of pulse reflection, photon loss and
//!   the fidelity of the cavity-mediated CZ gate.
//! * [`noise`]: stochastic dephasing, echo filter functions and transport
//!   noise.
//! * [`protocols`]: composite logical procedures (measurement-based Hadamard,
//!   Bell measurements, teleported CNOT, leakage detection).

pub mod cavity;
pub mod linalg;
pub mod logical;
pub mod noise;
pub mod protocols;
pub mod qsim;

pub use linalg::{CMatrix, CVector, C64};
pub use qsim::{QuantumRegister, RngSeed};
