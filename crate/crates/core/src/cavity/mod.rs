//! Pulse-level model of the atom–cavity interface.
//!
//! The cavity mode obeys the Langevin equation
//! `ȧ = −i[a, H] − (κ/2)a − √κ a_in` with `a_out = a_in + √κ a`. For weak
//! pulses the atomic polarizations behave as damped linear oscillators, which
//! gives the closed-form reflection coefficient
//!
//! ```text
//! r(ω) = 1 − κ / (κ/2 − iω + G²/(γ/2 − iω)),   G² = Σ g_i²
//! ```
//!
//! for field components `∝ e^{−iωt}`. Atoms in `|1⟩` do not couple and drop
//! out of `G²`. Spontaneous emission of atom `i` leaves the system in a
//! reservoir mode of amplitude `√γ b_i(ω)`; keeping these modes makes every
//! component of the reflected pulse a pure multimode coherent state.

mod fidelity;
mod langevin;
mod pulse;

pub use fidelity::{
    average_fidelity_haar, cz_gate_fidelity, cz_output_state, fidelity_vs_coupling,
    fidelity_vs_photon_number, physical_cz_gram, ComponentOutput, CouplingScaling, CzOutput,
    uniform_amplitudes, FieldState, SweepPoint,
};
pub use langevin::{integrate_langevin, TimeDomainResult};
pub use pulse::{propagate_pulse, MultimodeField, PulseKind, PulseShape, PulseSpec, ReflectionResult, SpectralGrid};

use thiserror::Error;

use crate::linalg::{C64, ONE};

/// `2π × 10⁶`: converts MHz to rad/s.
pub const MHZ: f64 = 2.0 * std::f64::consts::PI * 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CavityError {
    #[error("cavity rates must be positive and finite: {0}")]
    InvalidParams(String),
    #[error("pulse shape is not normalized: ∫|f|²dt = {0}")]
    NonNormalizedShape(f64),
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),
    #[error("component amplitudes must satisfy Σ|ε|² = 1, got {0}")]
    InvalidAmplitudes(f64),
    #[error("empty sweep grid")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, CavityError>;

/// Atom–cavity rates in rad/s. `g` is the reference coupling `g_o`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CavityParams {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl CavityParams {
    pub fn new(g: f64, kappa: f64, gamma: f64) -> Result<Self> {
        let p = Self { g, kappa, gamma };
        p.validate()?;
        Ok(p)
    }

    /// Rates given as `ν` in MHz with `ω = 2πν`.
    pub fn from_mhz(g: f64, kappa: f64, gamma: f64) -> Result<Self> {
        Self::new(g * MHZ, kappa * MHZ, gamma * MHZ)
    }

    /// `(g, κ, γ)/2π = (27, 2.4, 2.6)` MHz.
    pub fn reference() -> Self {
        Self { g: 27.0 * MHZ, kappa: 2.4 * MHZ, gamma: 2.6 * MHZ }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(self.g) && ok(self.kappa) && self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(CavityError::InvalidParams(format!(
                "g = {}, kappa = {}, gamma = {}",
                self.g, self.kappa, self.gamma
            )));
        }
        Ok(())
    }

    /// Strong-coupling figure of merit `C = g²/(κγ)`.
    pub fn cooperativity(&self) -> f64 {
        self.g * self.g / (self.kappa * self.gamma)
    }

    /// Equal couplings for both cavity atoms.
    pub fn couplings(&self) -> [f64; 2] {
        [self.g, self.g]
    }

    /// `r(ω)` with `n_coupled` atoms of coupling `g` in `|0⟩`.
    pub fn reflection(&self, omega: f64, n_coupled: u32) -> C64 {
        reflection_coefficient(omega, self.kappa, self.gamma, n_coupled as f64 * self.g * self.g)
    }
}

/// Reflection coefficient of the single-sided cavity with collective coupling
/// `G² = g_sq`.
pub fn reflection_coefficient(omega: f64, kappa: f64, gamma: f64, g_sq: f64) -> C64 {
    ONE + kappa.sqrt() * cavity_response(omega, kappa, gamma, g_sq)
}

/// Intracavity response `a(ω)/a_in(ω)` and the per-atom polarization
/// response `b_i(ω)/a_in(ω)` for coupling `g_i`.
pub(crate) fn cavity_response(omega: f64, kappa: f64, gamma: f64, g_sq: f64) -> C64 {
    let atomic = C64::new(gamma / 2.0, -omega);
    if g_sq == 0.0 {
        return -kappa.sqrt() / C64::new(kappa / 2.0, -omega);
    }
    if atomic.norm() == 0.0 {
        // lossless atoms on resonance: infinite dressed shift, empty cavity
        return C64::new(0.0, 0.0);
    }
    -kappa.sqrt() / (C64::new(kappa / 2.0, -omega) + g_sq / atomic)
}

pub(crate) fn polarization_response(omega: f64, gamma: f64, g_i: f64, cavity: C64) -> C64 {
    let atomic = C64::new(gamma / 2.0, -omega);
    if atomic.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    C64::new(0.0, -g_i) * cavity / atomic
}
