//! Seeded dense state engine over two-level atoms.
//!
//! # Qubit ordering
//!
//! Qubit `q` of a register corresponds to bit `q` of the basis index
//! (little-endian). A ket written as a bit string, e.g. `|0101⟩`, lists qubit
//! 0 first, so `basis_index("0101") == 0b1010`. Local operators follow the same
//! rule: bit `m` of a local matrix index belongs to `targets[m]`. Every other
//! module inherits this convention.
//!
//! # Randomness
//!
//! Measurement outcomes come from an [`OutcomeSource`]. The seeded source is a
//! ChaCha8 generator seeded with [`RngSeed`]; it draws exactly one `f64` per
//! measurement and picks the outcome by inverse CDF in projector order, so a
//! run is replayable from its seed and call sequence.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};

/// Largest register the dense backend accepts.
pub const MAX_QUBITS: usize = 14;

const UNITARY_TOL: f64 = 1e-10;
const PROJECTOR_TOL: f64 = 1e-10;
const MIN_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("operator is not unitary within {tol:e}")]
    NotUnitary { tol: f64 },
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),
    #[error("operator dimension {dim} does not match {targets} target qubit(s)")]
    DimensionMismatch { dim: usize, targets: usize },
    #[error("invalid projector set: {0}")]
    InvalidProjectors(String),
    #[error("all outcome probabilities are below {MIN_PROBABILITY:e}")]
    NoValidOutcome,
    #[error("scripted outcome {outcome} has probability {probability:e}")]
    ImpossibleOutcome { outcome: usize, probability: f64 },
    #[error("outcome script exhausted")]
    ScriptExhausted,
    #[error("operation requires a density-matrix register")]
    RequiresMixed,
    #[error("empty qubit set")]
    EmptySelection,
    #[error("register of {0} qubits exceeds the dense backend limit")]
    TooLarge(usize),
    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, QsimError>;

/// Seed for the replayable outcome stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent stream `k` of the same seed. Used to give Monte Carlo
    /// realizations their own generators regardless of scheduling.
    pub fn stream(self, k: u64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_stream(k);
        rng
    }
}

/// Source of measurement outcomes.
pub trait OutcomeSource {
    /// Pick an outcome index given the Born probabilities of every outcome.
    fn select(&mut self, probabilities: &[f64]) -> Result<usize>;
}

/// Born-rule sampling from a ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct SeededOutcomes {
    rng: ChaCha8Rng,
}

impl SeededOutcomes {
    pub fn new(seed: RngSeed) -> Self {
        Self { rng: seed.rng() }
    }

    pub fn from_rng(rng: ChaCha8Rng) -> Self {
        Self { rng }
    }
}

impl OutcomeSource for SeededOutcomes {
    fn select(&mut self, probabilities: &[f64]) -> Result<usize> {
        let total: f64 = probabilities.iter().sum();
        if probabilities.iter().all(|&p| p < MIN_PROBABILITY) {
            return Err(QsimError::NoValidOutcome);
        }
        let u = self.rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut last_valid = 0;
        for (k, &p) in probabilities.iter().enumerate() {
            if p >= MIN_PROBABILITY {
                last_valid = k;
                acc += p;
                if u < acc {
                    return Ok(k);
                }
            }
        }
        Ok(last_valid)
    }
}

/// Forced outcomes, for enumerating measurement branches.
#[derive(Debug, Clone, Default)]
pub struct ScriptedOutcomes {
    queue: VecDeque<usize>,
}

impl ScriptedOutcomes {
    pub fn new(outcomes: impl IntoIterator<Item = usize>) -> Self {
        Self { queue: outcomes.into_iter().collect() }
    }

    pub fn remaining(&self) -> usize {
        self.queue.len()
    }
}

impl OutcomeSource for ScriptedOutcomes {
    fn select(&mut self, probabilities: &[f64]) -> Result<usize> {
        let outcome = self.queue.pop_front().ok_or(QsimError::ScriptExhausted)?;
        let probability = probabilities.get(outcome).copied().unwrap_or(0.0);
        if probability < MIN_PROBABILITY {
            return Err(QsimError::ImpossibleOutcome { outcome, probability });
        }
        Ok(outcome)
    }
}

/// A complete set of orthogonal projectors on `k` qubits.
#[derive(Debug, Clone)]
pub struct ProjectorSet {
    projectors: Vec<CMatrix>,
    labels: Vec<String>,
    n_targets: usize,
}

impl ProjectorSet {
    pub fn new(projectors: Vec<CMatrix>, labels: Vec<String>) -> Result<Self> {
        if projectors.is_empty() {
            return Err(QsimError::InvalidProjectors("no projectors".into()));
        }
        if projectors.len() != labels.len() {
            return Err(QsimError::InvalidProjectors("label count mismatch".into()));
        }
        let dim = projectors[0].nrows();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(QsimError::InvalidProjectors(format!("dimension {dim}")));
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for (p, label) in projectors.iter().zip(&labels) {
            if p.shape() != (dim, dim) {
                return Err(QsimError::InvalidProjectors(format!("{label}: shape mismatch")));
            }
            if !linalg::is_hermitian(p, PROJECTOR_TOL) {
                return Err(QsimError::InvalidProjectors(format!("{label}: not Hermitian")));
            }
            if linalg::max_abs_diff(&(p * p), p) > PROJECTOR_TOL {
                return Err(QsimError::InvalidProjectors(format!("{label}: not idempotent")));
            }
            sum += p;
        }
        if linalg::max_abs_diff(&sum, &linalg::identity(dim)) > PROJECTOR_TOL {
            return Err(QsimError::InvalidProjectors("projectors do not sum to identity".into()));
        }
        Ok(Self { projectors, labels, n_targets: dim.trailing_zeros() as usize })
    }

    /// Two-outcome set `{P, I − P}`.
    pub fn binary(p: CMatrix, label: &str, complement_label: &str) -> Result<Self> {
        let comp = linalg::identity(p.nrows()) - &p;
        Self::new(vec![p, comp], vec![label.to_string(), complement_label.to_string()])
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn n_targets(&self) -> usize {
        self.n_targets
    }

    pub fn projector(&self, k: usize) -> &CMatrix {
        &self.projectors[k]
    }

    pub fn label(&self, k: usize) -> &str {
        &self.labels[k]
    }
}

/// Result of a projective measurement. The register itself holds the
/// post-measurement state.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub outcome: usize,
    pub label: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(CVector),
    Mixed(CMatrix),
}

/// Register of `n` two-level atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRegister {
    n_qubits: usize,
    labels: Vec<String>,
    state: State,
}

/// Basis index of a bit string; character `q` is qubit `q`.
pub fn basis_index(bits: &str) -> usize {
    bits.chars()
        .enumerate()
        .map(|(q, ch)| match ch {
            '0' => 0,
            '1' => 1 << q,
            other => panic!("invalid bit character {other:?}"),
        })
        .sum()
}

/// Normalized pure state `Σ amp_k |bits_k⟩`.
pub fn ket(terms: &[(C64, &str)]) -> CVector {
    let n = terms[0].1.len();
    let mut v = CVector::zeros(1 << n);
    for (amp, bits) in terms {
        assert_eq!(bits.len(), n);
        v[basis_index(bits)] += *amp;
    }
    let norm = v.norm();
    v.unscale(norm)
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|q| format!("q{q}")).collect()
}

fn check_targets(targets: &[usize], n_qubits: usize) -> Result<()> {
    for (k, &t) in targets.iter().enumerate() {
        if t >= n_qubits {
            return Err(QsimError::IndexOutOfRange { index: t, n_qubits });
        }
        if targets[..k].contains(&t) {
            return Err(QsimError::DuplicateTarget(t));
        }
    }
    Ok(())
}

/// Full-register indices touched by a local operator on `targets`, grouped by
/// the untouched bits. `f(indices)` is called once per group with
/// `indices[l]` the full index whose target bits spell local index `l`.
fn for_each_block(n_qubits: usize, targets: &[usize], mut f: impl FnMut(&[usize])) {
    let k = targets.len();
    let mask: usize = targets.iter().map(|t| 1 << t).sum();
    let offsets: Vec<usize> = (0..1usize << k)
        .map(|l| (0..k).filter(|m| (l >> m) & 1 == 1).map(|m| 1 << targets[m]).sum())
        .collect();
    let mut indices = vec![0usize; 1 << k];
    for base in 0..1usize << n_qubits {
        if base & mask != 0 {
            continue;
        }
        for (slot, off) in indices.iter_mut().zip(&offsets) {
            *slot = base | off;
        }
        f(&indices);
    }
}

fn apply_to_vector(v: &mut CVector, op: &CMatrix, n_qubits: usize, targets: &[usize]) {
    let dim = op.nrows();
    let mut buf = vec![ZERO; dim];
    for_each_block(n_qubits, targets, |idx| {
        for (b, &i) in buf.iter_mut().zip(idx) {
            *b = v[i];
        }
        for (r, &i) in idx.iter().enumerate() {
            let mut acc = ZERO;
            for (col, b) in buf.iter().enumerate() {
                acc += op[(r, col)] * b;
            }
            v[i] = acc;
        }
    });
}

/// `ρ → A ρ B†` with both `A` and `B` local to `targets`.
fn sandwich(rho: &mut CMatrix, left: &CMatrix, right: &CMatrix, n_qubits: usize, targets: &[usize]) {
    let dim = rho.nrows();
    for j in 0..dim {
        let mut col = rho.column(j).into_owned();
        apply_to_vector(&mut col, left, n_qubits, targets);
        rho.set_column(j, &col);
    }
    let right_conj = right.map(|z| z.conj());
    for i in 0..dim {
        let mut row = rho.row(i).transpose();
        apply_to_vector(&mut row, &right_conj, n_qubits, targets);
        rho.set_row(i, &row.transpose());
    }
}

impl QuantumRegister {
    /// All atoms in `|0⟩`.
    pub fn zeros(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(QsimError::EmptySelection);
        }
        if n_qubits > MAX_QUBITS {
            return Err(QsimError::TooLarge(n_qubits));
        }
        let mut v = CVector::zeros(1 << n_qubits);
        v[0] = ONE;
        Ok(Self { n_qubits, labels: default_labels(n_qubits), state: State::Pure(v) })
    }

    pub fn from_bits(bits: &str) -> Result<Self> {
        Self::from_amplitudes(ket(&[(ONE, bits)]))
    }

    pub fn from_amplitudes(amplitudes: CVector) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(QsimError::InvalidState(format!("length {dim} is not 2^n")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(QsimError::TooLarge(n_qubits));
        }
        let reg = Self { n_qubits, labels: default_labels(n_qubits), state: State::Pure(amplitudes) };
        reg.validate()?;
        Ok(reg)
    }

    pub fn from_density(rho: CMatrix) -> Result<Self> {
        let dim = rho.nrows();
        if !rho.is_square() || !dim.is_power_of_two() || dim < 2 {
            return Err(QsimError::InvalidState(format!("shape {:?}", rho.shape())));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        let reg = Self { n_qubits, labels: default_labels(n_qubits), state: State::Mixed(rho) };
        reg.validate()?;
        Ok(reg)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n_qubits, "one label per qubit");
        self.labels = labels;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.state, State::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&CVector> {
        match &self.state {
            State::Pure(v) => Some(v),
            State::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> CMatrix {
        match &self.state {
            State::Pure(v) => linalg::projector(v),
            State::Mixed(rho) => rho.clone(),
        }
    }

    /// Switch to density-matrix mode.
    pub fn into_mixed(mut self) -> Self {
        self.make_mixed();
        self
    }

    pub fn make_mixed(&mut self) {
        if let State::Pure(v) = &self.state {
            self.state = State::Mixed(linalg::projector(v));
        }
    }

    /// Check the normalization and positivity invariants.
    pub fn validate(&self) -> Result<()> {
        match &self.state {
            State::Pure(v) => {
                let norm = v.norm_squared();
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(QsimError::InvalidState(format!("norm² = {norm}")));
                }
            }
            State::Mixed(rho) => {
                if !linalg::is_hermitian(rho, 1e-12) {
                    return Err(QsimError::InvalidState("not Hermitian".into()));
                }
                let tr = linalg::trace(rho);
                if (tr - ONE).norm() > 1e-12 {
                    return Err(QsimError::InvalidState(format!("trace = {tr}")));
                }
                if rho.nrows() <= 256 {
                    let min = linalg::hermitian_eigenvalues(rho)[0];
                    if min < -1e-10 {
                        return Err(QsimError::InvalidState(format!("eigenvalue {min}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Norm² for pure states, trace for mixed ones.
    pub fn norm(&self) -> f64 {
        match &self.state {
            State::Pure(v) => v.norm_squared(),
            State::Mixed(rho) => linalg::trace(rho).re,
        }
    }

    /// Apply a unitary `u` on `targets`; `targets[m]` carries local bit `m`.
    pub fn apply_unitary(&mut self, u: &CMatrix, targets: &[usize]) -> Result<()> {
        self.check_operator(u, targets)?;
        if !linalg::is_unitary(u, UNITARY_TOL) {
            return Err(QsimError::NotUnitary { tol: UNITARY_TOL });
        }
        self.apply_operator_unchecked(u, targets);
        Ok(())
    }

    /// Apply a completely positive map given by a Schur (entrywise) product
    /// on the local density matrix of `targets`:
    /// `ρ_{(l,e),(l',e')} → G_{l,l'} ρ_{(l,e),(l',e')}`.
    /// `G` must be a positive semidefinite Gram matrix with unit diagonal.
    pub fn apply_schur_channel(&mut self, gram: &CMatrix, targets: &[usize]) -> Result<()> {
        self.check_operator(gram, targets)?;
        if !linalg::is_hermitian(gram, 1e-10) {
            return Err(QsimError::InvalidState("Schur channel matrix not Hermitian".into()));
        }
        self.make_mixed();
        let n = self.n_qubits;
        let local_of = |index: usize| -> usize {
            targets.iter().enumerate().map(|(m, t)| ((index >> t) & 1) << m).sum()
        };
        if let State::Mixed(rho) = &mut self.state {
            let dim = rho.nrows();
            let locals: Vec<usize> = (0..dim).map(local_of).collect();
            for j in 0..dim {
                for i in 0..dim {
                    rho[(i, j)] *= gram[(locals[i], locals[j])];
                }
            }
        }
        debug_assert!(n == self.n_qubits);
        Ok(())
    }

    fn check_operator(&self, op: &CMatrix, targets: &[usize]) -> Result<()> {
        if targets.is_empty() {
            return Err(QsimError::EmptySelection);
        }
        check_targets(targets, self.n_qubits)?;
        if !op.is_square() || op.nrows() != 1 << targets.len() {
            return Err(QsimError::DimensionMismatch { dim: op.nrows(), targets: targets.len() });
        }
        Ok(())
    }

    fn apply_operator_unchecked(&mut self, op: &CMatrix, targets: &[usize]) {
        let n = self.n_qubits;
        match &mut self.state {
            State::Pure(v) => apply_to_vector(v, op, n, targets),
            State::Mixed(rho) => sandwich(rho, op, op, n, targets),
        }
    }

    /// `⟨P⟩` for a local operator on `targets`.
    pub fn expectation(&self, op: &CMatrix, targets: &[usize]) -> Result<C64> {
        self.check_operator(op, targets)?;
        Ok(match &self.state {
            State::Pure(v) => {
                let mut w = v.clone();
                apply_to_vector(&mut w, op, self.n_qubits, targets);
                v.dotc(&w)
            }
            State::Mixed(rho) => {
                let mut acc = ZERO;
                for j in 0..rho.nrows() {
                    let mut col = rho.column(j).into_owned();
                    apply_to_vector(&mut col, op, self.n_qubits, targets);
                    acc += col[j];
                }
                acc
            }
        })
    }

    /// Born probabilities of every outcome of `ps` on `targets`.
    pub fn probabilities(&self, ps: &ProjectorSet, targets: &[usize]) -> Result<Vec<f64>> {
        if ps.n_targets() != targets.len() {
            return Err(QsimError::DimensionMismatch { dim: 1 << ps.n_targets(), targets: targets.len() });
        }
        (0..ps.len())
            .map(|k| self.expectation(ps.projector(k), targets).map(|p| p.re.max(0.0)))
            .collect()
    }

    /// Project onto outcome `k` and renormalize; returns its probability.
    pub fn project(&mut self, ps: &ProjectorSet, targets: &[usize], k: usize) -> Result<f64> {
        let p = self.probabilities(ps, targets)?[k];
        if p < MIN_PROBABILITY {
            return Err(QsimError::ImpossibleOutcome { outcome: k, probability: p });
        }
        self.apply_operator_unchecked(ps.projector(k), targets);
        match &mut self.state {
            State::Pure(v) => v.unscale_mut(p.sqrt()),
            State::Mixed(rho) => rho.unscale_mut(p),
        }
        Ok(p)
    }

    /// Non-destructive projective measurement.
    pub fn measure(
        &mut self,
        ps: &ProjectorSet,
        targets: &[usize],
        source: &mut dyn OutcomeSource,
    ) -> Result<Measurement> {
        let probabilities = self.probabilities(ps, targets)?;
        if probabilities.iter().all(|&p| p < MIN_PROBABILITY) {
            return Err(QsimError::NoValidOutcome);
        }
        let outcome = source.select(&probabilities)?;
        let probability = self.project(ps, targets, outcome)?;
        Ok(Measurement { outcome, label: ps.label(outcome).to_string(), probability })
    }

    /// Reduced density matrix over `keep`; qubit `m` of the result is
    /// `keep[m]` of this register.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<QuantumRegister> {
        if keep.is_empty() {
            return Err(QsimError::EmptySelection);
        }
        check_targets(keep, self.n_qubits)?;
        let rest: Vec<usize> = (0..self.n_qubits).filter(|q| !keep.contains(q)).collect();
        let scatter = |bits: usize, positions: &[usize]| -> usize {
            positions.iter().enumerate().map(|(m, p)| ((bits >> m) & 1) << p).sum()
        };
        let dk = 1usize << keep.len();
        let de = 1usize << rest.len();
        let kept: Vec<usize> = (0..dk).map(|a| scatter(a, keep)).collect();
        let traced: Vec<usize> = (0..de).map(|e| scatter(e, &rest)).collect();
        let mut out = CMatrix::zeros(dk, dk);
        match &self.state {
            State::Pure(v) => {
                for &e in &traced {
                    for b in 0..dk {
                        let vb = v[kept[b] | e].conj();
                        if vb == ZERO {
                            continue;
                        }
                        for a in 0..dk {
                            out[(a, b)] += v[kept[a] | e] * vb;
                        }
                    }
                }
            }
            State::Mixed(rho) => {
                for &e in &traced {
                    for b in 0..dk {
                        for a in 0..dk {
                            out[(a, b)] += rho[(kept[a] | e, kept[b] | e)];
                        }
                    }
                }
            }
        }
        let labels = keep.iter().map(|&q| self.labels[q].clone()).collect();
        Ok(QuantumRegister { n_qubits: keep.len(), labels, state: State::Mixed(out) })
    }

    /// Tensor product; this register's qubits come first.
    pub fn tensor(&self, other: &QuantumRegister) -> Result<QuantumRegister> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(QsimError::TooLarge(n));
        }
        let shift = self.n_qubits;
        let state = match (&self.state, &other.state) {
            (State::Pure(a), State::Pure(b)) => {
                let mut v = CVector::zeros(1 << n);
                for (j, bj) in b.iter().enumerate() {
                    for (i, ai) in a.iter().enumerate() {
                        v[i | (j << shift)] = ai * bj;
                    }
                }
                State::Pure(v)
            }
            _ => {
                let a = self.density_matrix();
                let b = other.density_matrix();
                State::Mixed(b.kronecker(&a))
            }
        };
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Ok(QuantumRegister { n_qubits: n, labels, state })
    }

    /// Fidelity with a pure reference state.
    pub fn fidelity_with(&self, psi: &CVector) -> f64 {
        match &self.state {
            State::Pure(v) => linalg::pure_fidelity(psi, v),
            State::Mixed(rho) => linalg::fidelity_with_pure(rho, psi),
        }
    }
}

/// Outcome labels of the two homodyne projections `{P1, P2}` and `{P3, P4}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum PiLabel {
    Pi1,
    Pi2,
    Pi3,
    Pi4,
}

impl PiLabel {
    pub fn from_p12(outcome: usize) -> Self {
        if outcome == 0 { PiLabel::Pi1 } else { PiLabel::Pi2 }
    }

    pub fn from_p34(outcome: usize) -> Self {
        if outcome == 0 { PiLabel::Pi3 } else { PiLabel::Pi4 }
    }

    /// The other outcome of the same projector pair.
    pub fn flipped(self) -> Self {
        match self {
            PiLabel::Pi1 => PiLabel::Pi2,
            PiLabel::Pi2 => PiLabel::Pi1,
            PiLabel::Pi3 => PiLabel::Pi4,
            PiLabel::Pi4 => PiLabel::Pi3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PiLabel::Pi1 => "pi1",
            PiLabel::Pi2 => "pi2",
            PiLabel::Pi3 => "pi3",
            PiLabel::Pi4 => "pi4",
        }
    }
}

impl std::fmt::Display for PiLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `{P1 = |11⟩⟨11|, P2 = I − P1}` on two atoms.
pub fn p12() -> ProjectorSet {
    let p1 = linalg::diagonal(&[ZERO, ZERO, ZERO, ONE]);
    ProjectorSet::binary(p1, "pi1", "pi2").expect("P1/P2 is a valid projector set")
}

/// `{P3 = |00⟩⟨00| + |11⟩⟨11|, P4 = I − P3}` on two atoms.
pub fn p34() -> ProjectorSet {
    let p3 = linalg::diagonal(&[ONE, ZERO, ZERO, ONE]);
    ProjectorSet::binary(p3, "pi3", "pi4").expect("P3/P4 is a valid projector set")
}

/// Physical controlled-Z `exp(iπ|11⟩⟨11|)`.
pub fn cz() -> CMatrix {
    linalg::diagonal(&[ONE, ONE, ONE, -ONE])
}

pub fn swap() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}

/// `R_z(α) = exp(−iα σ_z)`.
pub fn rz(alpha: f64) -> CMatrix {
    linalg::diagonal(&[C64::from_polar(1.0, -alpha), C64::from_polar(1.0, alpha)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, pauli_x};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn basis_index_is_little_endian() {
        assert_eq!(basis_index("0101"), 0b1010);
        assert_eq!(basis_index("1000"), 1);
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let mut reg = QuantumRegister::from_amplitudes(ket(&[(ONE, "01"), (linalg::I, "10")])).unwrap();
        let before = reg.clone();
        reg.apply_unitary(&linalg::identity(4), &[0, 1]).unwrap();
        assert_eq!(reg, before);
    }

    #[test]
    fn bit_flip_on_qubit_zero() {
        let mut reg = QuantumRegister::from_bits("01").unwrap();
        reg.apply_unitary(&pauli_x(), &[0]).unwrap();
        assert_eq!(reg.amplitudes().unwrap()[basis_index("11")], ONE);
    }

    #[test]
    fn cz_is_an_involution() {
        let psi = ket(&[(c(0.3, 0.1), "00"), (c(-0.2, 0.5), "01"), (ONE, "10"), (c(0.7, -0.4), "11")]);
        let mut reg = QuantumRegister::from_amplitudes(psi.clone()).unwrap();
        reg.apply_unitary(&cz(), &[0, 1]).unwrap();
        reg.apply_unitary(&cz(), &[0, 1]).unwrap();
        assert!((reg.fidelity_with(&psi) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_operators() {
        let mut reg = QuantumRegister::zeros(2).unwrap();
        let not_unitary = linalg::diagonal(&[ONE, c(2.0, 0.0)]);
        assert_eq!(reg.apply_unitary(&not_unitary, &[0]), Err(QsimError::NotUnitary { tol: UNITARY_TOL }));
        assert_eq!(
            reg.apply_unitary(&pauli_x(), &[2]),
            Err(QsimError::IndexOutOfRange { index: 2, n_qubits: 2 })
        );
        assert_eq!(reg.apply_unitary(&cz(), &[1, 1]), Err(QsimError::DuplicateTarget(1)));
    }

    #[test]
    fn p12_on_basis_states() {
        let mut src = SeededOutcomes::new(RngSeed(1));
        let mut reg = QuantumRegister::from_bits("11").unwrap();
        let m = reg.measure(&p12(), &[0, 1], &mut src).unwrap();
        assert_eq!((m.label.as_str(), m.probability), ("pi1", 1.0));
        assert_eq!(reg, QuantumRegister::from_bits("11").unwrap());

        let mut reg = QuantumRegister::from_bits("01").unwrap();
        let m = reg.measure(&p12(), &[0, 1], &mut src).unwrap();
        assert_eq!((m.label.as_str(), m.probability), ("pi2", 1.0));
    }

    #[test]
    fn p34_on_superposition() {
        let psi = ket(&[(ONE, "00"), (ONE, "01")]);
        for (outcome, bits) in [(0, "00"), (1, "01")] {
            let mut reg = QuantumRegister::from_amplitudes(psi.clone()).unwrap();
            let mut src = ScriptedOutcomes::new([outcome]);
            let m = reg.measure(&p34(), &[0, 1], &mut src).unwrap();
            assert!((m.probability - 0.5).abs() < 1e-15);
            assert!((reg.fidelity_with(&ket(&[(ONE, bits)])) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn scripted_impossible_outcome_is_an_error() {
        let mut reg = QuantumRegister::from_bits("00").unwrap();
        let mut src = ScriptedOutcomes::new([1]);
        assert!(matches!(
            reg.measure(&p34(), &[0, 1], &mut src),
            Err(QsimError::ImpossibleOutcome { outcome: 1, .. })
        ));
    }

    #[test]
    fn invalid_projector_sets_are_rejected() {
        let half = linalg::diagonal(&[c(0.5, 0.0), ZERO]);
        assert!(ProjectorSet::binary(half, "a", "b").is_err());
        let p = linalg::diagonal(&[ONE, ZERO]);
        assert!(ProjectorSet::new(vec![p.clone(), p], vec!["a".into(), "b".into()]).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let reg = QuantumRegister::from_bits("01").unwrap();
        let r = reg.partial_trace(&[0]).unwrap().density_matrix();
        assert!(linalg::max_abs_diff(&r, &linalg::diagonal(&[ONE, ZERO])) < 1e-15);

        let bell = QuantumRegister::from_amplitudes(ket(&[(ONE, "00"), (ONE, "11")])).unwrap();
        for q in 0..2 {
            let r = bell.partial_trace(&[q]).unwrap().density_matrix();
            let half = linalg::identity(2).map(|z| z * 0.5);
            assert!(linalg::max_abs_diff(&r, &half) < 1e-15);
        }

        // |0_L⟩ ⊗ |+_L⟩ over four atoms, keep the first logical block
        let h = FRAC_1_SQRT_2;
        let reg = QuantumRegister::from_amplitudes(ket(&[(c(h, 0.0), "0101"), (c(h, 0.0), "0110")]))
            .unwrap()
            .into_mixed();
        let r = reg.partial_trace(&[0, 1]).unwrap();
        assert!((r.fidelity_with(&ket(&[(ONE, "01")])) - 1.0).abs() < 1e-15);
        assert_eq!(reg.partial_trace(&[]), Err(QsimError::EmptySelection));
    }

    #[test]
    fn tensor_puts_left_operand_first() {
        let a = QuantumRegister::from_bits("1").unwrap();
        let b = QuantumRegister::from_bits("0").unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.amplitudes().unwrap()[basis_index("10")], ONE);
        let mixed = a.clone().into_mixed().tensor(&b).unwrap();
        assert!((mixed.fidelity_with(&ket(&[(ONE, "10")])) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_mode_matches_pure_mode() {
        let psi = ket(&[(c(0.3, 0.1), "000"), (c(-0.2, 0.5), "011"), (ONE, "101")]);
        let mut pure = QuantumRegister::from_amplitudes(psi).unwrap();
        let mut mixed = pure.clone().into_mixed();
        let u = linalg::local_product(&[&linalg::hadamard(), &rz(0.3)]);
        for reg in [&mut pure, &mut mixed] {
            reg.apply_unitary(&u, &[2, 0]).unwrap();
            reg.apply_unitary(&cz(), &[1, 2]).unwrap();
        }
        let d = linalg::max_abs_diff(&pure.density_matrix(), &mixed.density_matrix());
        assert!(d < 1e-14);
        mixed.validate().unwrap();
    }
}
