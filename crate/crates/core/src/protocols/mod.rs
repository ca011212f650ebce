//! Composite procedures built from cavity primitives: physical CZ, `{P1,P2}`
//! and `{P3,P4}` projections, measurement-based logical gates, Bell
//! measurements, the teleported CNOT and leakage detection.
//!
//! A [`ProtocolRun`] owns the register, the cavity occupancy schedule and an
//! append-only [`OutcomeRecord`]. Measurement outcomes come from an
//! [`OutcomeSource`] passed per call so branches can be scripted; stochastic
//! noise (homodyne label errors, transport dephasing) draws from a separate
//! generator owned by the run.

mod composite;
mod record;

pub use composite::{
    arbitrary_logical_rotation, bell_subspace_measurement, cnot_corrections, full_bsm, leakage_detect, logical_cz,
    logical_hadamard, prepare_xi, teleport_input, teleported_cnot, xi_corrections, xi_state, zeta_state, BellBasis, HadamardOutcome,
    LeakVerdict, TeleportOutcome, XiOutcome,
};
pub use record::{OutcomeRecord, RecordEntry, TransportStep};

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::cavity::{physical_cz_gram, CavityError, CavityParams, PulseSpec};
use crate::linalg::{CMatrix, CVector};
use crate::logical::{self, LogicalError, LogicalQubit};
use crate::noise::{self, NoiseError, TransportNoise};
use crate::qsim::{self, OutcomeSource, PiLabel, QsimError, QuantumRegister, RngSeed};

/// At most this many atoms share the cavity.
pub const CAVITY_CAPACITY: usize = 2;
/// Largest register the noisy (density-matrix) CZ accepts.
pub const MAX_MIXED_QUBITS: usize = 10;
/// Leakage population above which a logical-subspace operation refuses to run.
pub const LEAK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Logical(#[from] LogicalError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Cavity(#[from] CavityError),
    #[error("cavity occupancy would be {0:?}; at most {CAVITY_CAPACITY} atoms fit")]
    Occupancy(Vec<usize>),
    #[error("atom {0} is not inside the cavity")]
    NotInCavity(usize),
    #[error("state has leakage population {0:.3e} outside the logical subspace")]
    Leakage(f64),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

/// Physical imperfections switched on in noisy mode.
#[derive(Debug, Clone, Default)]
pub struct NoiseConfig {
    /// Realistic cavity CZ from pulse-level reflection.
    pub cavity: Option<(CavityParams, PulseSpec)>,
    /// Homodyne probe amplitude `|α|` for label errors `½ erfc(√2|α|)`.
    pub homodyne_alpha: Option<f64>,
    /// Dephasing accrued by every transport step.
    pub transport: Option<TransportNoise>,
}

#[derive(Debug, Clone, Default)]
pub enum Mode {
    #[default]
    Ideal,
    Noisy(NoiseConfig),
}

/// `½ erfc(√2|α|)`.
pub fn homodyne_error_probability(alpha: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(std::f64::consts::SQRT_2 * alpha.abs())
}

#[derive(Debug, Clone)]
pub struct ProtocolRun {
    register: QuantumRegister,
    layout: Vec<LogicalQubit>,
    record: OutcomeRecord,
    occupancy: BTreeSet<usize>,
    mode: Mode,
    noise_rng: ChaCha8Rng,
    cz_gram: Option<CMatrix>,
    transport_variance: Option<f64>,
}

/// Stream of the run seed reserved for noise draws.
const NOISE_STREAM: u64 = 0x006e_6f69_7365;

impl ProtocolRun {
    pub fn new(register: QuantumRegister, layout: Vec<LogicalQubit>, mode: Mode, seed: RngSeed) -> Result<Self> {
        for q in &layout {
            for a in q.atoms() {
                if a >= register.n_qubits() {
                    return Err(QsimError::IndexOutOfRange { index: a, n_qubits: register.n_qubits() }.into());
                }
            }
        }
        Ok(Self {
            register,
            layout,
            record: OutcomeRecord::default(),
            occupancy: BTreeSet::new(),
            mode,
            noise_rng: seed.stream(NOISE_STREAM),
            cz_gram: None,
            transport_variance: None,
        })
    }

    /// Product of single logical-qubit states on the standard layout
    /// (ancilla preparation by direct injection).
    pub fn from_logical_states(states: &[CVector], mode: Mode, seed: RngSeed) -> Result<Self> {
        let mut amps = CVector::from_element(1, crate::linalg::ONE);
        for s in states {
            if s.len() != 2 {
                return Err(ProtocolError::Precondition("logical states have two amplitudes".into()));
            }
            // qubit k is bit k: the new factor becomes the high bit
            amps = s.kronecker(&amps);
        }
        Self::from_logical_amplitudes(&amps, states.len(), mode, seed)
    }

    /// Logical amplitudes over `m` qubits on the standard layout.
    pub fn from_logical_amplitudes(amps: &CVector, m: usize, mode: Mode, seed: RngSeed) -> Result<Self> {
        let layout = logical::standard_layout(m);
        let reg = logical::encode(amps, &layout, 2 * m)?;
        Self::new(reg, layout, mode, seed)
    }

    pub fn register(&self) -> &QuantumRegister {
        &self.register
    }

    pub fn register_mut(&mut self) -> &mut QuantumRegister {
        &mut self.register
    }

    pub fn layout(&self) -> &[LogicalQubit] {
        &self.layout
    }

    pub fn qubit(&self, k: usize) -> LogicalQubit {
        self.layout[k]
    }

    pub fn record(&self) -> &OutcomeRecord {
        &self.record
    }

    pub fn occupancy(&self) -> Vec<usize> {
        self.occupancy.iter().copied().collect()
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn is_noisy(&self) -> bool {
        matches!(self.mode, Mode::Noisy(_))
    }

    fn noise(&self) -> Option<&NoiseConfig> {
        match &self.mode {
            Mode::Noisy(cfg) => Some(cfg),
            Mode::Ideal => None,
        }
    }

    pub(crate) fn log(&mut self, entry: RecordEntry) {
        self.record.push(entry);
    }

    /// Logical density matrix and leakage of `qubits`.
    pub fn logical_state(&self, qubits: &[LogicalQubit]) -> Result<(CMatrix, f64)> {
        Ok(logical::logical_density(&self.register, qubits)?)
    }

    pub(crate) fn check_no_leakage(&self, qubits: &[LogicalQubit]) -> Result<()> {
        let (_, leak) = self.logical_state(qubits)?;
        if leak > LEAK_TOLERANCE {
            return Err(ProtocolError::Leakage(leak));
        }
        Ok(())
    }

    /// Move atoms in and out of the cavity.
    pub fn transport(&mut self, step: TransportStep, noisy: bool) -> Result<()> {
        let mut next = self.occupancy.clone();
        for a in &step.out {
            next.remove(a);
        }
        for &a in &step.into {
            if a >= self.register.n_qubits() {
                return Err(QsimError::IndexOutOfRange { index: a, n_qubits: self.register.n_qubits() }.into());
            }
            next.insert(a);
        }
        if next.len() > CAVITY_CAPACITY {
            return Err(ProtocolError::Occupancy(next.into_iter().collect()));
        }
        let mut phases = Vec::new();
        if noisy {
            if let Some(tn) = self.noise().and_then(|c| c.transport.clone()) {
                let var = match self.transport_variance {
                    Some(v) => v,
                    None => {
                        let v = noise::encoded_phase_variance(&tn)?;
                        self.transport_variance = Some(v);
                        v
                    }
                };
                let moved: BTreeSet<usize> = step.into.iter().chain(&step.out).copied().collect();
                let hit: Vec<(usize, LogicalQubit)> = self
                    .layout
                    .iter()
                    .copied()
                    .enumerate()
                    .filter(|(_, q)| q.atoms().iter().any(|a| moved.contains(a)))
                    .collect();
                for (k, q) in hit {
                    let phi = if var > 0.0 {
                        Normal::new(0.0, var.sqrt())
                            .map_err(|e| NoiseError::InvalidParameter(e.to_string()))?
                            .sample(&mut self.noise_rng)
                    } else {
                        0.0
                    };
                    noise::apply_dephasing_channel(&mut self.register, q, phi)?;
                    phases.push((k, phi));
                }
            }
        }
        self.occupancy = next;
        self.log(RecordEntry::Transport { step, phases });
        Ok(())
    }

    /// Bring exactly `atoms` into the cavity, moving everything else out.
    pub fn schedule(&mut self, atoms: &[usize]) -> Result<()> {
        let wanted: BTreeSet<usize> = atoms.iter().copied().collect();
        if wanted == self.occupancy {
            return Ok(());
        }
        let out: Vec<usize> = self.occupancy.difference(&wanted).copied().collect();
        let into: Vec<usize> = wanted.difference(&self.occupancy).copied().collect();
        let duration = self.noise().and_then(|c| c.transport.as_ref()).map(|t| t.tau_t).unwrap_or(0.0);
        self.transport(TransportStep { into, out, duration }, true)
    }

    fn require_inside(&self, atoms: &[usize]) -> Result<()> {
        for a in atoms {
            if !self.occupancy.contains(a) {
                return Err(ProtocolError::NotInCavity(*a));
            }
        }
        Ok(())
    }

    /// Physical `U_CZ = exp(iπ|11⟩⟨11|)` on two atoms inside the cavity.
    /// Noisy mode with a cavity model applies the exact field-traced channel.
    pub fn physical_cz(&mut self, i: usize, j: usize) -> Result<()> {
        self.require_inside(&[i, j])?;
        let cavity = self.noise().and_then(|c| c.cavity.clone());
        match cavity {
            None => self.register.apply_unitary(&qsim::cz(), &[i, j])?,
            Some((params, pulse)) => {
                if self.register.n_qubits() > MAX_MIXED_QUBITS {
                    return Err(QsimError::TooLarge(self.register.n_qubits()).into());
                }
                if self.cz_gram.is_none() {
                    self.cz_gram = Some(physical_cz_gram(&pulse, &params, params.couplings())?);
                }
                let gram = self.cz_gram.as_ref().expect("cached");
                self.register.apply_schur_channel(gram, &[i, j])?;
            }
        }
        self.log(RecordEntry::Gate { name: "cz".into(), atoms: vec![i, j] });
        Ok(())
    }

    fn reported(&mut self, label: PiLabel) -> PiLabel {
        match self.noise().and_then(|c| c.homodyne_alpha) {
            Some(alpha) => {
                let p = homodyne_error_probability(alpha);
                if self.noise_rng.random::<f64>() < p {
                    label.flipped()
                } else {
                    label
                }
            }
            None => label,
        }
    }

    /// `{P1, P2}` on two atoms inside the cavity. Returns the reported label.
    pub fn measure_p12(&mut self, i: usize, j: usize, source: &mut dyn OutcomeSource) -> Result<PiLabel> {
        self.require_inside(&[i, j])?;
        let m = self.register.measure(&qsim::p12(), &[i, j], source)?;
        let outcome = PiLabel::from_p12(m.outcome);
        let reported = self.reported(outcome);
        self.log(RecordEntry::Measure { atoms: [i, j], outcome, reported, probability: m.probability });
        Ok(reported)
    }

    /// `{P3, P4}`: atom `i` reflects alone, then is swapped for atom `j`.
    pub fn measure_p34(&mut self, i: usize, j: usize, source: &mut dyn OutcomeSource) -> Result<PiLabel> {
        self.schedule(&[i])?;
        self.schedule(&[j])?;
        let m = self.register.measure(&qsim::p34(), &[i, j], source)?;
        let outcome = PiLabel::from_p34(m.outcome);
        let reported = self.reported(outcome);
        self.log(RecordEntry::Measure { atoms: [i, j], outcome, reported, probability: m.probability });
        Ok(reported)
    }

    /// Logical Z measurement of `q` through two `{P1,P2}` projections.
    pub fn logical_z(&mut self, q: LogicalQubit, source: &mut dyn OutcomeSource) -> Result<logical::LogicalOutcome> {
        let x = crate::linalg::pauli_x();
        self.schedule(&q.atoms())?;
        self.register.apply_unitary(&x, &[q.atom_a()])?;
        let first = self.measure_p12(q.atom_a(), q.atom_b(), source)?;
        self.register.apply_unitary(&x, &[q.atom_a()])?;
        self.register.apply_unitary(&x, &[q.atom_b()])?;
        let second = self.measure_p12(q.atom_a(), q.atom_b(), source)?;
        self.register.apply_unitary(&x, &[q.atom_b()])?;
        let out = logical::decode_z_pair(first, second)?;
        Ok(out)
    }

    /// Logical measurement in `basis` via a basis change around [`Self::logical_z`].
    pub fn logical_measure(
        &mut self,
        q: LogicalQubit,
        basis: logical::MeasurementBasis,
        source: &mut dyn OutcomeSource,
    ) -> Result<logical::LogicalOutcome> {
        logical::basis_change(&mut self.register, q, basis, false)?;
        let out = self.logical_z(q, source)?;
        logical::basis_change(&mut self.register, q, basis, true)?;
        Ok(out)
    }

    /// Logical Pauli correction, logged with its trigger.
    pub fn correct(&mut self, q: LogicalQubit, pauli: logical::Pauli, trigger: &str) -> Result<()> {
        if pauli == logical::Pauli::I {
            return Ok(());
        }
        logical::logical_pauli(&mut self.register, q, pauli)?;
        self.log(RecordEntry::Correction { atoms: q.atoms(), op: format!("{pauli:?}"), trigger: trigger.to_string() });
        Ok(())
    }

    /// Logical `U_z(α)` by a physical rotation of `atom_a`.
    pub fn z_rotation(&mut self, q: LogicalQubit, alpha: f64) -> Result<()> {
        logical::logical_z_rotation(&mut self.register, q, alpha)?;
        self.log(RecordEntry::Gate { name: format!("rz({alpha:.12})"), atoms: vec![q.atom_a()] });
        Ok(())
    }
}

/// Mean `|+⟩` fidelities after one transport, encoded versus bare, over
/// `realizations` Gaussian phase draws from stream `k` of `seed`.
pub fn transport_fidelity_comparison(tn: &TransportNoise, realizations: usize, seed: RngSeed) -> Result<(f64, f64)> {
    let enc_var = noise::encoded_phase_variance(tn)?;
    let bare_var = noise::bare_phase_variance(tn)?;
    let q = LogicalQubit::new(0, 1)?;
    let plus_l = logical::encode(&logical::LogicalState::Plus.amplitudes(), &[q], 2)?;
    let plus_l_amps = plus_l.amplitudes().expect("pure").clone();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = CVector::from_column_slice(&[crate::linalg::c(h, 0.0), crate::linalg::c(h, 0.0)]);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let (mut enc, mut bare) = (0.0, 0.0);
    for k in 0..realizations {
        let mut rng = seed.stream(k as u64);
        let z1: f64 = std_normal.sample(&mut rng);
        let z2: f64 = std_normal.sample(&mut rng);
        let mut reg = plus_l.clone();
        noise::apply_dephasing_channel(&mut reg, q, enc_var.sqrt() * z1)?;
        enc += reg.fidelity_with(&plus_l_amps);
        let mut single = QuantumRegister::from_amplitudes(plus.clone())?;
        single.apply_unitary(&qsim::rz(bare_var.sqrt() * z2), &[0])?;
        bare += single.fidelity_with(&plus);
    }
    Ok((enc / realizations as f64, bare / realizations as f64))
}
