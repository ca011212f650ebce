use rand::SeedableRng;
use rayon::prelude::*;

use super::pulse::{MultimodeField, PulseKind, PulseSpec, ReflectionResult, SpectralGrid};
use super::{CavityError, CavityParams, Result};
use crate::linalg::{self, CMatrix, C64, ZERO};

/// Field left behind by one atomic component: a coherent state or an odd cat
/// built on a multimode field (reflected plus reservoir modes).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub kind: PulseKind,
    pub alpha: C64,
    pub modes: MultimodeField,
}

/// `⟨β u | β′ v⟩` for multimode coherent states with unnormalized modes.
fn coherent_overlap(beta: C64, u_sq: f64, beta2: C64, v_sq: f64, uv: C64) -> C64 {
    (-0.5 * beta.norm_sqr() * u_sq - 0.5 * beta2.norm_sqr() * v_sq + beta.conj() * beta2 * uv).exp()
}

/// `N_−²` for an odd cat of mean photon number `a`.
fn cat_norm_sqr(a: f64) -> f64 {
    1.0 / (-2.0 * (-2.0 * a).exp_m1())
}

impl FieldState {
    /// `⟨self | other⟩`.
    pub fn overlap(&self, grid: &SpectralGrid, other: &Self) -> C64 {
        let u_sq = self.modes.norm_sqr(grid);
        let v_sq = other.modes.norm_sqr(grid);
        let uv = self.modes.inner(grid, &other.modes);
        let (b1, b2) = (self.alpha, other.alpha);
        match (self.kind, other.kind) {
            (PulseKind::Coherent, PulseKind::Coherent) => coherent_overlap(b1, u_sq, b2, v_sq, uv),
            (PulseKind::OddCat, PulseKind::OddCat) => {
                let (a1, a2) = (b1.norm_sqr() * u_sq, b2.norm_sqr() * v_sq);
                if a1 == 0.0 || a2 == 0.0 {
                    // single-photon limit
                    let denom = (u_sq * v_sq).sqrt();
                    return if denom > 0.0 { uv / denom } else { ZERO };
                }
                let n = (cat_norm_sqr(a1) * cat_norm_sqr(a2)).sqrt();
                // the four branch terms collapse to 4 e^{−(a1+a2)/2} sinh(β̄β′⟨u,v⟩)
                n * 4.0 * (-0.5 * (a1 + a2)).exp() * (b1.conj() * b2 * uv).sinh()
            }
            _ => panic!("overlap between coherent and cat fields"),
        }
    }

    /// Input pulse times `sign`, no scattering.
    pub fn ideal(grid: &SpectralGrid, pulse: &PulseSpec, sign: f64) -> Self {
        Self { kind: pulse.kind, alpha: pulse.alpha, modes: MultimodeField::ideal(grid, sign) }
    }
}

/// One logical component `|m_L n_L⟩` of the CZ output.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentOutput {
    pub m: u8,
    pub n: u8,
    pub n_coupled: u32,
    pub amp_ratio: C64,
    pub eta: f64,
    /// `arg⟨f_in, h⟩`.
    pub theta: f64,
    /// `⟨ideal_mn | out_mn⟩` including the field.
    pub overlap: C64,
}

/// Output of the cavity CZ on two logical qubits, component `2m + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CzOutput {
    pub amplitudes: [C64; 4],
    pub components: [ComponentOutput; 4],
}

impl CzOutput {
    /// `|⟨Ψ_id|Ψ_out⟩|²`.
    pub fn fidelity(&self) -> f64 {
        fidelity_from_overlaps(&self.amplitudes, &self.overlaps())
    }

    pub fn overlaps(&self) -> [C64; 4] {
        [0, 1, 2, 3].map(|c| self.components[c].overlap)
    }
}

fn fidelity_from_overlaps(eps: &[C64; 4], overlaps: &[C64; 4]) -> f64 {
    let s: C64 = eps.iter().zip(overlaps).map(|(e, o)| e.norm_sqr() * o).sum();
    s.norm_sqr().clamp(0.0, 1.0)
}

fn check_amplitudes(eps: &[C64; 4]) -> Result<()> {
    let total: f64 = eps.iter().map(|e| e.norm_sqr()).sum();
    if !total.is_finite() || (total - 1.0).abs() > 1e-10 {
        return Err(CavityError::InvalidAmplitudes(total));
    }
    Ok(())
}

/// Uniform `ε_mn = 1/2`.
pub fn uniform_amplitudes() -> [C64; 4] {
    [C64::new(0.5, 0.0); 4]
}

/// Reflect the pulse off the cavity holding atom 1 of each logical qubit with
/// couplings `couplings`. An atom couples when its logical qubit is `|0_L⟩`.
pub fn cz_output_state(eps: &[C64; 4], pulse: &PulseSpec, params: &CavityParams, couplings: [f64; 2]) -> Result<CzOutput> {
    check_amplitudes(eps)?;
    params.validate()?;
    let grid = SpectralGrid::new(pulse)?;
    let components = [0usize, 1, 2, 3].map(|c| {
        let (m, n) = ((c >> 1) as u8, (c & 1) as u8);
        let coupled = [m == 0, n == 0];
        let modes = MultimodeField::reflect(&grid, params, couplings, coupled);
        let refl = ReflectionResult::from_spectrum(&grid, &modes.reflected, pulse.alpha);
        let sign = if m == 1 && n == 1 { -1.0 } else { 1.0 };
        let out = FieldState { kind: pulse.kind, alpha: pulse.alpha, modes };
        let ideal = FieldState::ideal(&grid, pulse, sign);
        ComponentOutput {
            m,
            n,
            n_coupled: coupled.iter().filter(|&&b| b).count() as u32,
            amp_ratio: refl.amp_ratio,
            eta: refl.eta,
            theta: refl.amp_ratio.arg(),
            overlap: ideal.overlap(&grid, &out),
        }
    });
    Ok(CzOutput { amplitudes: *eps, components })
}

/// Gate fidelity with both atoms at the reference coupling.
pub fn cz_gate_fidelity(eps: &[C64; 4], pulse: &PulseSpec, params: &CavityParams) -> Result<f64> {
    Ok(cz_output_state(eps, pulse, params, params.couplings())?.fidelity())
}

/// Fidelity averaged over Haar-random two-qubit inputs: `(mean, standard error)`.
pub fn average_fidelity_haar(
    pulse: &PulseSpec,
    params: &CavityParams,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(CavityError::EmptyGrid);
    }
    let out = cz_output_state(&uniform_amplitudes(), pulse, params, params.couplings())?;
    let overlaps = out.overlaps();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..samples)
        .map(|_| {
            let v = linalg::random_state(4, &mut rng);
            let eps = [v[0], v[1], v[2], v[3]];
            fidelity_from_overlaps(&eps, &overlaps)
        })
        .collect();
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    Ok((mean, (var / samples as f64).sqrt()))
}

/// Schur-product matrix `G[c, c′] = ⟨E_c′|E_c⟩` of the field states left by the
/// physical components `c = bit(i) + 2·bit(j)` of two atoms sharing the cavity.
/// Tracing out the field maps `ρ → G ∘ ρ`.
pub fn physical_cz_gram(pulse: &PulseSpec, params: &CavityParams, couplings: [f64; 2]) -> Result<CMatrix> {
    params.validate()?;
    let grid = SpectralGrid::new(pulse)?;
    let fields: Vec<FieldState> = (0..4usize)
        .map(|c| {
            let coupled = [c & 1 == 0, c >> 1 == 0];
            FieldState {
                kind: pulse.kind,
                alpha: pulse.alpha,
                modes: MultimodeField::reflect(&grid, params, couplings, coupled),
            }
        })
        .collect();
    Ok(CMatrix::from_fn(4, 4, |c, d| fields[d].overlap(&grid, &fields[c])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingScaling {
    /// Only the first logical qubit's atom has coupling `g`.
    Single,
    /// Both atoms share coupling `g`.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    pub fidelity: f64,
    /// Mean photon loss over the coupled components.
    pub eta: f64,
}

fn sweep_point(x: f64, out: &CzOutput) -> SweepPoint {
    let lossy: Vec<f64> = out.components.iter().filter(|c| c.n_coupled > 0).map(|c| c.eta).collect();
    SweepPoint { x, fidelity: out.fidelity(), eta: lossy.iter().sum::<f64>() / lossy.len() as f64 }
}

/// `F` versus mean photon number `n̄ = |α|²`, in grid order.
pub fn fidelity_vs_photon_number(
    nbar: &[f64],
    pulse: &PulseSpec,
    params: &CavityParams,
    eps: &[C64; 4],
) -> Result<Vec<SweepPoint>> {
    if nbar.is_empty() {
        return Err(CavityError::EmptyGrid);
    }
    nbar.par_iter()
        .map(|&n| {
            if !(n >= 0.0 && n.is_finite()) {
                return Err(CavityError::InvalidPulse(format!("mean photon number {n}")));
            }
            let p = pulse.with_alpha(C64::new(n.sqrt(), 0.0));
            Ok(sweep_point(n, &cz_output_state(eps, &p, params, params.couplings())?))
        })
        .collect()
}

/// `F` versus `g/g_o`, in grid order.
pub fn fidelity_vs_coupling(
    ratios: &[f64],
    scaling: CouplingScaling,
    pulse: &PulseSpec,
    params: &CavityParams,
    eps: &[C64; 4],
) -> Result<Vec<SweepPoint>> {
    if ratios.is_empty() {
        return Err(CavityError::EmptyGrid);
    }
    ratios
        .par_iter()
        .map(|&r| {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CavityError::InvalidParams(format!("coupling ratio {r}")));
            }
            let couplings = match scaling {
                CouplingScaling::Single => [r * params.g, params.g],
                CouplingScaling::Both => [r * params.g, r * params.g],
            };
            Ok(sweep_point(r, &cz_output_state(eps, pulse, params, couplings)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::MHZ;

    fn reference() -> (CavityParams, PulseSpec) {
        let p = CavityParams::reference();
        (p, PulseSpec::reference(&p, 1.26))
    }

    /// Four-term odd-cat overlap written out branch by branch.
    fn cat_overlap_oracle(a: f64, uu: f64, vv: f64, uv: C64) -> C64 {
        let al = C64::new(a.sqrt(), 0.0);
        let n1 = 1.0 / (2.0 * (1.0 - (-2.0 * a * uu).exp())).sqrt();
        let n2 = 1.0 / (2.0 * (1.0 - (-2.0 * a * vv).exp())).sqrt();
        let mut s = ZERO;
        for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            s += s1 * s2 * coherent_overlap(al * s1, uu, al * s2, vv, uv);
        }
        n1 * n2 * s
    }

    #[test]
    fn cat_overlap_matches_branch_sum() {
        let (p, pulse) = reference();
        let grid = SpectralGrid::new(&pulse).unwrap();
        let a = FieldState::ideal(&grid, &pulse, 1.0);
        let b = FieldState {
            kind: PulseKind::OddCat,
            alpha: pulse.alpha,
            modes: MultimodeField::reflect(&grid, &p, p.couplings(), [true, false]),
        };
        let uv = a.modes.inner(&grid, &b.modes);
        let expected = cat_overlap_oracle(pulse.alpha.norm_sqr(), 1.0, 1.0, uv);
        assert!((a.overlap(&grid, &b) - expected).norm() < 1e-12);
        assert!((a.overlap(&grid, &a) - 1.0).norm() < 1e-12);
        // the cat is odd: flipping the mode flips the sign
        let neg = FieldState::ideal(&grid, &pulse, -1.0);
        assert!((a.overlap(&grid, &neg) + 1.0).norm() < 1e-12);
    }

    #[test]
    fn reference_fidelity_is_near_099() {
        let (p, pulse) = reference();
        let f = cz_gate_fidelity(&uniform_amplitudes(), &pulse, &p).unwrap();
        assert!((0.98..=1.0).contains(&f), "F = {f}");
    }

    #[test]
    fn bare_component_flips_and_coupled_components_do_not() {
        let (p, pulse) = reference();
        let out = cz_output_state(&uniform_amplitudes(), &pulse, &p, p.couplings()).unwrap();
        for comp in &out.components {
            if comp.n_coupled == 0 {
                assert!((comp.theta.abs() - std::f64::consts::PI).abs() < 1e-3);
                assert!(comp.amp_ratio.norm() > 0.999);
            } else {
                assert!(comp.theta.abs() < 1e-3);
                let r0 = 1.0 - p.kappa * p.gamma / (2.0 * comp.n_coupled as f64 * p.g * p.g);
                assert!((comp.amp_ratio.norm() - r0).abs() < 2e-4, "{comp:?}");
            }
        }
    }

    #[test]
    fn small_alpha_limit_loses_only_eta() {
        let (p, pulse) = reference();
        let out = cz_output_state(&uniform_amplitudes(), &pulse.with_alpha(C64::new(1e-4, 0.0)), &p, p.couplings())
            .unwrap();
        let mean_eta: f64 = out.components.iter().map(|c| c.eta).sum::<f64>() / 4.0;
        let f = out.fidelity();
        assert!(f <= 1.0 && f > 1.0 - 2.0 * mean_eta - 1e-2, "F = {f}, eta = {mean_eta}");
    }

    #[test]
    fn ideal_limit_has_unit_fidelity() {
        let p = CavityParams::new(5000.0 * MHZ, 2.4 * MHZ, 0.0).unwrap();
        let pulse = PulseSpec::gaussian(1e5 / p.kappa, 1.26, PulseKind::OddCat);
        let f = cz_gate_fidelity(&uniform_amplitudes(), &pulse, &p).unwrap();
        assert!((1.0 - f) < 1e-6, "F = {f}");
    }

    #[test]
    fn invalid_amplitudes_rejected() {
        let (p, pulse) = reference();
        let eps = [C64::new(1.0, 0.0); 4];
        assert!(matches!(cz_gate_fidelity(&eps, &pulse, &p), Err(CavityError::InvalidAmplitudes(_))));
    }

    #[test]
    fn gram_matrix_is_a_valid_schur_channel() {
        let (p, pulse) = reference();
        let g = physical_cz_gram(&pulse, &p, p.couplings()).unwrap();
        assert!(linalg::is_hermitian(&g, 1e-12));
        for c in 0..4 {
            assert!((g[(c, c)] - 1.0).norm() < 1e-12);
        }
        assert!(linalg::hermitian_eigenvalues(&g)[0] > -1e-12);
        // |11⟩ picks up the CZ sign relative to the other components
        assert!(g[(3, 0)].re < -0.98);
        assert!(g[(1, 0)].re > 0.98);
    }

    #[test]
    fn sweeps_keep_grid_order_and_reject_empty_grids() {
        let (p, pulse) = reference();
        let eps = uniform_amplitudes();
        let grid: Vec<f64> = (1..=5).map(|k| k as f64 * 0.5).collect();
        let pts = fidelity_vs_photon_number(&grid, &pulse, &p, &eps).unwrap();
        assert_eq!(pts.iter().map(|s| s.x).collect::<Vec<_>>(), grid);
        assert!(pts.windows(2).all(|w| w[1].fidelity <= w[0].fidelity + 1e-12));
        assert!(matches!(fidelity_vs_photon_number(&[], &pulse, &p, &eps), Err(CavityError::EmptyGrid)));
        assert!(matches!(
            fidelity_vs_coupling(&[], CouplingScaling::Single, &pulse, &p, &eps),
            Err(CavityError::EmptyGrid)
        ));
    }

    #[test]
    fn haar_average_is_a_fidelity() {
        let (p, pulse) = reference();
        let (mean, se) = average_fidelity_haar(&pulse, &p, 2000, 5).unwrap();
        assert!((0.95..=1.0).contains(&mean));
        assert!(se < 1e-2);
    }
}
