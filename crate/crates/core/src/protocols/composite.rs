use super::{ProtocolError, ProtocolRun, RecordEntry, Result};
use crate::linalg::{self, CVector};
use crate::logical::{self, BellState, LogicalOutcome, LogicalQubit, LogicalState, MeasurementBasis, Pauli};
use crate::qsim::{OutcomeSource, PiLabel};

/// Smallest acceptable fidelity of an ancilla with its nominal state.
const ANCILLA_TOLERANCE: f64 = 1e-9;

fn require_state(run: &ProtocolRun, q: LogicalQubit, state: LogicalState, role: &str) -> Result<()> {
    let (rho, leak) = run.logical_state(&[q])?;
    let f = linalg::fidelity_with_pure(&rho, &state.amplitudes());
    if leak > ANCILLA_TOLERANCE || f < 1.0 - ANCILLA_TOLERANCE {
        return Err(ProtocolError::Precondition(format!("{role} must be in {state:?}_L (fidelity {f:.3e})")));
    }
    Ok(())
}

fn logical_h(run: &mut ProtocolRun, q: LogicalQubit) -> Result<()> {
    logical::basis_change(run.register_mut(), q, MeasurementBasis::X, false)?;
    run.log(RecordEntry::Gate { name: "h_l".into(), atoms: q.atoms().to_vec() });
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HadamardOutcome {
    /// X-basis outcome on the input qubit.
    pub measured: LogicalOutcome,
    pub corrected: bool,
}

impl HadamardOutcome {
    pub fn leaked(&self) -> bool {
        self.measured == LogicalOutcome::Leak
    }
}

/// Measurement-based `H_L`: `output` starts in `|+_L⟩`, a physical CZ on the
/// two `atom_a`s entangles it with `input`, and an X measurement of `input`
/// leaves `H|ψ⟩` on `output` after `σx⊗σx` on outcome `−`.
pub fn logical_hadamard(
    run: &mut ProtocolRun,
    input: LogicalQubit,
    output: LogicalQubit,
    source: &mut dyn OutcomeSource,
) -> Result<HadamardOutcome> {
    require_state(run, output, LogicalState::Plus, "hadamard ancilla")?;
    run.schedule(&[input.atom_a(), output.atom_a()])?;
    run.physical_cz(input.atom_a(), output.atom_a())?;
    let measured = run.logical_measure(input, MeasurementBasis::X, source)?;
    let corrected = measured == LogicalOutcome::Minus;
    if corrected {
        run.correct(output, Pauli::X, "x=minus")?;
    }
    if measured == LogicalOutcome::Leak {
        run.log(RecordEntry::Result { name: "hadamard".into(), value: "leak".into() });
    }
    Ok(HadamardOutcome { measured, corrected })
}

/// `U_z(α) H U_z(β) H U_z(ς)` applied to `input`, teleported through two
/// `|+_L⟩` ancillas. The rotated state ends on `ancillas[1]`. Returns `None`
/// when either Hadamard step detected leakage.
#[allow(clippy::too_many_arguments)]
pub fn arbitrary_logical_rotation(
    run: &mut ProtocolRun,
    input: LogicalQubit,
    ancillas: [LogicalQubit; 2],
    alpha: f64,
    beta: f64,
    varsigma: f64,
    source: &mut dyn OutcomeSource,
) -> Result<Option<[HadamardOutcome; 2]>> {
    run.z_rotation(input, varsigma)?;
    let first = logical_hadamard(run, input, ancillas[0], source)?;
    if first.leaked() {
        return Ok(None);
    }
    run.z_rotation(ancillas[0], beta)?;
    let second = logical_hadamard(run, ancillas[0], ancillas[1], source)?;
    if second.leaked() {
        return Ok(None);
    }
    run.z_rotation(ancillas[1], alpha)?;
    Ok(Some([first, second]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum BellBasis {
    ZZ,
    XX,
    YY,
}

impl BellBasis {
    fn single(self) -> MeasurementBasis {
        match self {
            BellBasis::ZZ => MeasurementBasis::Z,
            BellBasis::XX => MeasurementBasis::X,
            BellBasis::YY => MeasurementBasis::Y,
        }
    }

    /// Bell states reported as `π3`.
    pub fn even_states(self) -> [BellState; 2] {
        match self {
            BellBasis::ZZ => [BellState::PhiPlus, BellState::PhiMinus],
            BellBasis::XX => [BellState::PhiPlus, BellState::PsiPlus],
            BellBasis::YY => [BellState::PhiMinus, BellState::PsiPlus],
        }
    }
}

/// Two-outcome Bell-subspace projection: `{P3,P4}` on the two `atom_a`s,
/// conjugated by `H⊗H` for XX and `HS†⊗HS†` for YY. `π3` is the `+1`
/// eigenspace of the measured correlator.
pub fn bell_subspace_measurement(
    run: &mut ProtocolRun,
    q1: LogicalQubit,
    q2: LogicalQubit,
    basis: BellBasis,
    source: &mut dyn OutcomeSource,
) -> Result<PiLabel> {
    run.check_no_leakage(&[q1, q2])?;
    let b = basis.single();
    for q in [q1, q2] {
        logical::basis_change(run.register_mut(), q, b, false)?;
    }
    let label = run.measure_p34(q1.atom_a(), q2.atom_a(), source)?;
    for q in [q1, q2] {
        logical::basis_change(run.register_mut(), q, b, true)?;
    }
    Ok(label)
}

/// ZZ then XX subspace measurements, identifying one Bell state.
pub fn full_bsm(
    run: &mut ProtocolRun,
    q1: LogicalQubit,
    q2: LogicalQubit,
    source: &mut dyn OutcomeSource,
) -> Result<BellState> {
    let zz = bell_subspace_measurement(run, q1, q2, BellBasis::ZZ, source)?;
    let xx = bell_subspace_measurement(run, q1, q2, BellBasis::XX, source)?;
    let bell = match (zz, xx) {
        (PiLabel::Pi3, PiLabel::Pi3) => BellState::PhiPlus,
        (PiLabel::Pi3, _) => BellState::PhiMinus,
        (_, PiLabel::Pi3) => BellState::PsiPlus,
        _ => BellState::PsiMinus,
    };
    run.log(RecordEntry::Result { name: "bsm".into(), value: bell.as_str().into() });
    Ok(bell)
}

/// Logical CZ: physical CZ on the two `atom_a`s.
pub fn logical_cz(run: &mut ProtocolRun, q1: LogicalQubit, q2: LogicalQubit) -> Result<()> {
    run.schedule(&[q1.atom_a(), q2.atom_a()])?;
    run.physical_cz(q1.atom_a(), q2.atom_a())
}

/// `|Ξ⟩ = CNOT_{A'→B'} |Φ+⟩_{AA'} |Φ+⟩_{BB'}` over qubits ordered
/// `(A, A', B, B')`, bit `k` the value of qubit `k`.
pub fn xi_state() -> CVector {
    let mut v = CVector::zeros(16);
    let h = linalg::c(0.5, 0.0);
    for (a, bb) in [(0usize, 0usize), (0, 3), (3, 1), (3, 2)] {
        v[a | (bb << 2)] = h;
    }
    v
}

/// `|+⟩_{A'} |Φ+⟩_{AB} |0⟩_{B'}` over qubits ordered `(A, A', B, B')`.
pub fn zeta_state() -> CVector {
    let mut v = CVector::zeros(16);
    let h = linalg::c(0.5, 0.0);
    for (a, ap, b) in [(0usize, 0usize, 0usize), (0, 1, 0), (1, 0, 1), (1, 1, 1)] {
        v[a | (ap << 1) | (b << 2)] = h;
    }
    v
}

/// Logical amplitudes over `[A'', A, A', B, B', B'']` with the two-qubit input
/// `psi` (control bit 0) on `(A'', B'')` and `|ζ⟩` on `(A, A', B, B')`.
pub fn teleport_input(psi: &CVector) -> CVector {
    let zeta = zeta_state();
    CVector::from_fn(64, |l, _| {
        let outer = (l & 1) | ((l >> 5) << 1);
        psi[outer] * zeta[(l >> 1) & 0b1111]
    })
}

/// Corrections `(on A', on B')` after the ZZ_{AA'} and XX_{BB'} outcomes.
pub fn xi_corrections(zz: PiLabel, xx: PiLabel) -> (Pauli, Pauli) {
    let a = if zz == PiLabel::Pi4 { Pauli::X } else { Pauli::I };
    let b = if xx == PiLabel::Pi4 { Pauli::Z } else { Pauli::I };
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XiOutcome {
    pub zz: PiLabel,
    pub xx: PiLabel,
    pub corrections: (Pauli, Pauli),
}

/// Turn `|ζ⟩` on `[A, A', B, B']` into `|Ξ⟩` with ZZ on `(A, A')`, XX on
/// `(B, B')` and the outcome-dependent Pauli corrections.
pub fn prepare_xi(run: &mut ProtocolRun, qubits: [LogicalQubit; 4], source: &mut dyn OutcomeSource) -> Result<XiOutcome> {
    let [a, ap, b, bp] = qubits;
    let zz = bell_subspace_measurement(run, a, ap, BellBasis::ZZ, source)?;
    let xx = bell_subspace_measurement(run, b, bp, BellBasis::XX, source)?;
    let corrections = xi_corrections(zz, xx);
    run.correct(ap, corrections.0, &format!("zz={}", zz.as_str()))?;
    run.correct(bp, corrections.1, &format!("xx={}", xx.as_str()))?;
    Ok(XiOutcome { zz, xx, corrections })
}

/// Corrections `(on A', on B')` after Bell outcomes on `(A'', A)` and `(B'', B)`:
/// `X^{x1} Z^{z1⊕z2}` and `X^{x1⊕x2} Z^{z2}`.
pub fn cnot_corrections(bell_a: BellState, bell_b: BellState) -> (Pauli, Pauli) {
    let (x1, z1) = bell_a.pauli().bits();
    let (x2, z2) = bell_b.pauli().bits();
    (Pauli::from_bits(x1, z1 ^ z2), Pauli::from_bits(x1 ^ x2, z2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TeleportOutcome {
    pub xi: XiOutcome,
    pub bell_a: BellState,
    pub bell_b: BellState,
    pub corrections: (Pauli, Pauli),
}

/// Teleported CNOT from control `A''` to target `B''`, output on `(A', B')`.
/// `qubits` is `[A'', A, A', B, B', B'']` with `(A, A', B, B')` holding `|ζ⟩`.
pub fn teleported_cnot(
    run: &mut ProtocolRun,
    qubits: [LogicalQubit; 6],
    source: &mut dyn OutcomeSource,
) -> Result<TeleportOutcome> {
    let [a2, a, ap, b, bp, b2] = qubits;
    let xi = prepare_xi(run, [a, ap, b, bp], source)?;
    let bell_a = full_bsm(run, a2, a, source)?;
    let bell_b = full_bsm(run, b2, b, source)?;
    let corrections = cnot_corrections(bell_a, bell_b);
    let trigger = format!("bsm={},{}", bell_a.as_str(), bell_b.as_str());
    run.correct(ap, corrections.0, &trigger)?;
    run.correct(bp, corrections.1, &trigger)?;
    Ok(TeleportOutcome { xi, bell_a, bell_b, corrections })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeakVerdict {
    pub first: PiLabel,
    pub second: PiLabel,
    pub leaked: bool,
}

/// Leakage check of `system` against a `|+_L⟩` ancilla: `{P3,P4}` on
/// `(A.b, B.b)` then `(A.a, B.b)`. Equal outcomes flag leakage; otherwise a
/// logical CNOT `A→B` disentangles the ancilla and restores `A`.
pub fn leakage_detect(
    run: &mut ProtocolRun,
    system: LogicalQubit,
    ancilla: LogicalQubit,
    source: &mut dyn OutcomeSource,
) -> Result<LeakVerdict> {
    require_state(run, ancilla, LogicalState::Plus, "leakage ancilla")?;
    let first = run.measure_p34(system.atom_b(), ancilla.atom_b(), source)?;
    let second = run.measure_p34(system.atom_a(), ancilla.atom_b(), source)?;
    let leaked = first == second;
    if leaked {
        run.log(RecordEntry::Result { name: "leakage".into(), value: "leak".into() });
    } else {
        logical_h(run, ancilla)?;
        logical_cz(run, system, ancilla)?;
        logical_h(run, ancilla)?;
        run.log(RecordEntry::Result { name: "leakage".into(), value: "clean".into() });
    }
    Ok(LeakVerdict { first, second, leaked })
}
