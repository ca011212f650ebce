//! Two-atom decoherence-free encoding and logical single-qubit operations.
//!
//! A logical qubit lives on an ordered atom pair `(atom_a, atom_b)` with
//! `|0_L⟩ = |01⟩` and `|1_L⟩ = |10⟩`. The complementary states
//! `|2_L⟩ = |00⟩` and `|3_L⟩ = |11⟩` are leakage.
//!
//! Within the 4-dimensional space of one pair the local index is
//! `bit(atom_a) + 2·bit(atom_b)`, so `|0_L⟩` is local index 2, `|1_L⟩` is 1,
//! and the leakage states are 0 and 3.

use std::f64::consts::FRAC_PI_4;

use thiserror::Error;

use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};
use crate::qsim::{self, OutcomeSource, PiLabel, QsimError, QuantumRegister};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogicalError {
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error("a logical qubit needs two distinct atoms, got ({0}, {0})")]
    SameAtoms(usize),
    #[error("logical Z sequence produced the forbidden outcome pair (pi1, pi1)")]
    InconsistentOutcome,
}

pub type Result<T> = std::result::Result<T, LogicalError>;

/// Local indices of the logical and leakage states within one atom pair.
pub const LOCAL_ZERO_L: usize = 2;
pub const LOCAL_ONE_L: usize = 1;
pub const LOCAL_LEAK_00: usize = 0;
pub const LOCAL_LEAK_11: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct LogicalQubit {
    atom_a: usize,
    atom_b: usize,
}

impl LogicalQubit {
    pub fn new(atom_a: usize, atom_b: usize) -> Result<Self> {
        if atom_a == atom_b {
            return Err(LogicalError::SameAtoms(atom_a));
        }
        Ok(Self { atom_a, atom_b })
    }

    pub fn atom_a(&self) -> usize {
        self.atom_a
    }

    pub fn atom_b(&self) -> usize {
        self.atom_b
    }

    pub fn atoms(&self) -> [usize; 2] {
        [self.atom_a, self.atom_b]
    }
}

/// Consecutive pairs `(0,1), (2,3), …` for `m` logical qubits.
pub fn standard_layout(m: usize) -> Vec<LogicalQubit> {
    (0..m).map(|k| LogicalQubit { atom_a: 2 * k, atom_b: 2 * k + 1 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => linalg::identity(2),
            Pauli::X => linalg::pauli_x(),
            Pauli::Y => linalg::pauli_y(),
            Pauli::Z => linalg::pauli_z(),
        }
    }

    /// Pauli `X^x Z^z` up to phase.
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// `(x, z)` exponents of `X^x Z^z` up to phase.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// Named single logical-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LogicalState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl LogicalState {
    pub fn amplitudes(self) -> CVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            LogicalState::Zero => (ONE, ZERO),
            LogicalState::One => (ZERO, ONE),
            LogicalState::Plus => (linalg::c(h, 0.0), linalg::c(h, 0.0)),
            LogicalState::Minus => (linalg::c(h, 0.0), linalg::c(-h, 0.0)),
            LogicalState::PlusI => (linalg::c(h, 0.0), linalg::c(0.0, h)),
            LogicalState::MinusI => (linalg::c(h, 0.0), linalg::c(0.0, -h)),
        };
        CVector::from_column_slice(&[a, b])
    }
}

/// Logical Bell states of two logical qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] =
        [BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus];

    /// Amplitudes over the two-logical-qubit basis, index `l0 + 2·l1`.
    pub fn amplitudes(self) -> CVector {
        let h = linalg::c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut v = CVector::zeros(4);
        match self {
            BellState::PhiPlus => {
                v[0] = h;
                v[3] = h;
            }
            BellState::PhiMinus => {
                v[0] = h;
                v[3] = -h;
            }
            BellState::PsiPlus => {
                v[1] = h;
                v[2] = h;
            }
            BellState::PsiMinus => {
                v[2] = h;
                v[1] = -h;
            }
        }
        v
    }

    /// Pauli `σ` with `|ψ⟩ ∝ (I ⊗ σ)|Φ+⟩`.
    pub fn pauli(self) -> Pauli {
        match self {
            BellState::PhiPlus => Pauli::I,
            BellState::PsiPlus => Pauli::X,
            BellState::PhiMinus => Pauli::Z,
            BellState::PsiMinus => Pauli::Y,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }
}

/// Physical basis index of logical basis state `logical_bits` (bit `k` is the
/// value of logical qubit `k`) with every atom outside the layout in `|0⟩`.
pub fn physical_index(layout: &[LogicalQubit], logical_bits: usize) -> usize {
    layout
        .iter()
        .enumerate()
        .map(|(k, q)| if (logical_bits >> k) & 1 == 0 { 1 << q.atom_b } else { 1 << q.atom_a })
        .sum()
}

/// Embed logical amplitudes (length `2^m`) into an `n_atoms` register.
pub fn encode(logical: &CVector, layout: &[LogicalQubit], n_atoms: usize) -> Result<QuantumRegister> {
    assert_eq!(logical.len(), 1 << layout.len(), "one amplitude per logical basis state");
    let mut v = CVector::zeros(1 << n_atoms);
    for (bits, amp) in logical.iter().enumerate() {
        v[physical_index(layout, bits)] = *amp;
    }
    Ok(QuantumRegister::from_amplitudes(v)?)
}

/// Logical-subspace density matrix of `layout` and the population outside it.
///
/// The returned matrix is the reduced state restricted to the logical
/// subspace; its trace is `1 − leakage`.
pub fn logical_density(reg: &QuantumRegister, layout: &[LogicalQubit]) -> Result<(CMatrix, f64)> {
    let atoms: Vec<usize> = layout.iter().flat_map(|q| q.atoms()).collect();
    let reduced = reg.partial_trace(&atoms)?.density_matrix();
    // within `reduced`, logical qubit k occupies local qubits 2k (a) and 2k+1 (b)
    let local_layout = standard_layout(layout.len());
    let m = layout.len();
    let idx: Vec<usize> = (0..1usize << m).map(|bits| physical_index(&local_layout, bits)).collect();
    let rho = CMatrix::from_fn(1 << m, 1 << m, |i, j| reduced[(idx[i], idx[j])]);
    let inside = linalg::trace(&rho).re;
    Ok((rho, (1.0 - inside).max(0.0)))
}

/// Embed a 2×2 logical operator into the pair space, identity on leakage.
pub fn embed_logical(u: &CMatrix) -> CMatrix {
    assert_eq!(u.shape(), (2, 2));
    let mut m = linalg::identity(4);
    let idx = [LOCAL_ZERO_L, LOCAL_ONE_L];
    for (r, &ir) in idx.iter().enumerate() {
        for (col, &ic) in idx.iter().enumerate() {
            m[(ir, ic)] = u[(r, col)];
        }
    }
    m
}

/// `H_L` on the logical basis.
pub fn hadamard_l() -> CMatrix {
    linalg::hadamard()
}

/// `S_L = diag(1, i)` on the logical basis.
pub fn s_l() -> CMatrix {
    linalg::diagonal(&[ONE, linalg::I])
}

/// Logical `U_z(α) = diag(e^{−iα}, e^{iα})`.
pub fn u_z(alpha: f64) -> CMatrix {
    linalg::diagonal(&[C64::from_polar(1.0, -alpha), C64::from_polar(1.0, alpha)])
}

/// Physical `R_z(α) = exp(−iα σ_z)` on `atom_a`, which acts as `U_z(α)` on
/// the logical subspace.
pub fn logical_z_rotation(reg: &mut QuantumRegister, q: LogicalQubit, alpha: f64) -> Result<()> {
    reg.apply_unitary(&qsim::rz(alpha), &[q.atom_a])?;
    Ok(())
}

/// Apply a logical unitary directly on the pair (identity on leakage).
pub fn apply_logical_unitary(reg: &mut QuantumRegister, q: LogicalQubit, u: &CMatrix) -> Result<()> {
    reg.apply_unitary(&embed_logical(u), &q.atoms())?;
    Ok(())
}

/// Logical Pauli from physical operations.
///
/// `X_L` swaps the two atoms. `Z_L = i·R_z(π/2)` on `atom_a`, which is the
/// physical `σ_z` of `atom_a`. `Y_L = i X_L Z_L`.
pub fn logical_pauli(reg: &mut QuantumRegister, q: LogicalQubit, which: Pauli) -> Result<()> {
    match which {
        Pauli::I => {}
        Pauli::X => reg.apply_unitary(&qsim::swap(), &q.atoms())?,
        Pauli::Z => {
            let z = qsim::rz(std::f64::consts::FRAC_PI_2).map(|e| e * linalg::I);
            reg.apply_unitary(&z, &[q.atom_a])?;
        }
        Pauli::Y => {
            logical_pauli(reg, q, Pauli::Z)?;
            logical_pauli(reg, q, Pauli::X)?;
            // global i makes Y_L = i X_L Z_L exact on the logical block
            let phase = linalg::diagonal(&[linalg::I, linalg::I]);
            reg.apply_unitary(&phase, &[q.atom_a])?;
        }
    }
    Ok(())
}

/// `S_L` from `U_z(π/4)` with its global phase `e^{iπ/4}` removed.
pub fn logical_s(reg: &mut QuantumRegister, q: LogicalQubit, dagger: bool) -> Result<()> {
    let angle = if dagger { -FRAC_PI_4 } else { FRAC_PI_4 };
    let u = qsim::rz(angle).map(|e| e * C64::from_polar(1.0, angle));
    reg.apply_unitary(&u, &[q.atom_a])?;
    Ok(())
}

/// Collective dephasing `exp(−iφσ_z)` on both atoms of the pair.
pub fn collective_dephasing(reg: &mut QuantumRegister, q: LogicalQubit, phi: f64) -> Result<()> {
    reg.apply_unitary(&qsim::rz(phi), &[q.atom_a])?;
    reg.apply_unitary(&qsim::rz(phi), &[q.atom_b])?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum LogicalOutcome {
    Plus,
    Minus,
    Leak,
}

impl LogicalOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            LogicalOutcome::Plus => "+",
            LogicalOutcome::Minus => "-",
            LogicalOutcome::Leak => "leak",
        }
    }
}

/// Decode the outcome pair of the logical Z sequence.
pub fn decode_z_pair(first: PiLabel, second: PiLabel) -> Result<LogicalOutcome> {
    match (first, second) {
        (PiLabel::Pi1, PiLabel::Pi2) => Ok(LogicalOutcome::Plus),
        (PiLabel::Pi2, PiLabel::Pi1) => Ok(LogicalOutcome::Minus),
        (PiLabel::Pi2, PiLabel::Pi2) => Ok(LogicalOutcome::Leak),
        _ => Err(LogicalError::InconsistentOutcome),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZMeasurement {
    pub outcome: LogicalOutcome,
    pub pair: (PiLabel, PiLabel),
    /// Joint probability of the observed pair.
    pub probability: f64,
}

/// Logical `σ_z^L` measurement from two `{P1, P2}` projections:
/// `σx⊗I`, `{P1,P2}`, `σx⊗σx`, `{P1,P2}`, `I⊗σx`.
pub fn logical_z_measurement(
    reg: &mut QuantumRegister,
    q: LogicalQubit,
    source: &mut dyn OutcomeSource,
) -> Result<ZMeasurement> {
    let x = linalg::pauli_x();
    let p12 = qsim::p12();
    let pair = q.atoms();
    reg.apply_unitary(&x, &[q.atom_a])?;
    let m1 = reg.measure(&p12, &pair, source)?;
    reg.apply_unitary(&x, &[q.atom_a])?;
    reg.apply_unitary(&x, &[q.atom_b])?;
    let m2 = reg.measure(&p12, &pair, source)?;
    reg.apply_unitary(&x, &[q.atom_b])?;
    let first = PiLabel::from_p12(m1.outcome);
    let second = PiLabel::from_p12(m2.outcome);
    Ok(ZMeasurement {
        outcome: decode_z_pair(first, second)?,
        pair: (first, second),
        probability: m1.probability * m2.probability,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum MeasurementBasis {
    X,
    Y,
    Z,
}

/// Rotate `basis` eigenstates onto the Z eigenstates (or back).
pub fn basis_change(reg: &mut QuantumRegister, q: LogicalQubit, basis: MeasurementBasis, inverse: bool) -> Result<()> {
    match (basis, inverse) {
        (MeasurementBasis::Z, _) => {}
        (MeasurementBasis::X, _) => apply_logical_unitary(reg, q, &hadamard_l())?,
        (MeasurementBasis::Y, false) => {
            logical_s(reg, q, true)?;
            apply_logical_unitary(reg, q, &hadamard_l())?;
        }
        (MeasurementBasis::Y, true) => {
            apply_logical_unitary(reg, q, &hadamard_l())?;
            logical_s(reg, q, false)?;
        }
    }
    Ok(())
}

/// Measure a logical qubit in the X, Y or Z basis (non-destructive).
pub fn logical_basis_measurement(
    reg: &mut QuantumRegister,
    q: LogicalQubit,
    basis: MeasurementBasis,
    source: &mut dyn OutcomeSource,
) -> Result<ZMeasurement> {
    basis_change(reg, q, basis, false)?;
    let m = logical_z_measurement(reg, q, source)?;
    basis_change(reg, q, basis, true)?;
    Ok(m)
}
