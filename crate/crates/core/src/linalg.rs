//! Small dense complex linear-algebra helpers shared by the simulator modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

pub fn diagonal(entries: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

/// Kronecker product of local operators in target order.
///
/// `ops[0]` acts on the least significant local bit, matching the
/// little-endian qubit convention of [`crate::qsim`]. This is the reverse of
/// the textbook `A ⊗ B` ordering.
pub fn local_product(ops: &[&CMatrix]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for op in ops {
        out = op.kronecker(&out);
    }
    out
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    if !u.is_square() {
        return false;
    }
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &identity(u.nrows())) <= tol
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()).scale(0.5);
    let mut values: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

/// Trace distance `½‖ρ − σ‖₁` between two density matrices.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(rho - sigma)).iter().map(|v| v.abs()).sum::<f64>()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// `|⟨a|b⟩|²` for normalized pure states.
pub fn pure_fidelity(a: &CVector, b: &CVector) -> f64 {
    inner(a, b).norm_sqr()
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_with_pure(rho: &CMatrix, psi: &CVector) -> f64 {
    psi.dotc(&(rho * psi)).re
}

pub fn projector(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

/// Haar-random pure state of dimension `dim`.
pub fn random_state<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    use rand_distr::{Distribution, StandardNormal};
    let mut v = CVector::from_fn(dim, |_, _| {
        c(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let n = v.norm();
    v.unscale_mut(n);
    v
}

/// Haar-random unitary via QR of a complex Ginibre matrix.
pub fn random_unitary<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        c(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // fix the phases so the distribution is Haar
    let mut phases = CMatrix::identity(dim, dim);
    for k in 0..dim {
        let d = r[(k, k)];
        phases[(k, k)] = if d.norm() > 0.0 { d / d.norm() } else { ONE };
    }
    q * phases
}
