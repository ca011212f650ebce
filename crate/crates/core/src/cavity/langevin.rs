use super::pulse::PulseSpec;
use super::{CavityParams, Result};
use crate::linalg::{C64, I, ZERO};

/// Reflection summary from direct time integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainResult {
    pub amp_ratio: C64,
    pub eta: f64,
    pub steps: usize,
}

/// `[a, b_1, b_2]`.
type Fields = [C64; 3];

fn derivative(y: &Fields, a_in: f64, params: &CavityParams, g: [f64; 2]) -> Fields {
    let (kappa, gamma) = (params.kappa, params.gamma);
    let [a, b1, b2] = *y;
    [
        -0.5 * kappa * a - I * (g[0] * b1 + g[1] * b2) - kappa.sqrt() * a_in,
        -0.5 * gamma * b1 - I * g[0] * a,
        -0.5 * gamma * b2 - I * g[1] * a,
    ]
}

fn axpy(y: &Fields, h: f64, k: &Fields) -> Fields {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]]
}

/// Integrate the linear Langevin equations for the cavity field `a` and the
/// polarizations `b_i` of atoms coupled with `g_i` (zero for uncoupled atoms)
/// using classical RK4, driven by the normalized pulse envelope.
///
/// ```text
/// ȧ   = −(κ/2) a − i Σ g_i b_i − √κ a_in
/// ḃ_i = −(γ/2) b_i − i g_i a
/// a_out = a_in + √κ a
/// ```
pub fn integrate_langevin(pulse: &PulseSpec, params: &CavityParams, couplings: [f64; 2]) -> Result<TimeDomainResult> {
    params.validate()?;
    pulse.validate()?;
    let g_coll = (couplings[0].powi(2) + couplings[1].powi(2)).sqrt();
    let fastest = g_coll.max(params.kappa).max(params.gamma);
    let slowest = if params.gamma > 0.0 { params.kappa.min(params.gamma) } else { params.kappa };
    let t_end = pulse.duration + 40.0 / slowest;
    let steps = (t_end * fastest / 0.05).ceil() as usize;
    // Simpson's rule needs an even number of intervals
    let steps = steps + steps % 2;
    let h = t_end / steps as f64;

    let out = |y: &Fields, t: f64| pulse.envelope(t) + params.kappa.sqrt() * y[0];
    let mut y: Fields = [ZERO; 3];
    let mut norm = 0.0;
    let mut overlap = ZERO;
    let mut accumulate = |k: usize, y: &Fields, t: f64| {
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let a_out = out(y, t);
        norm += w * a_out.norm_sqr();
        overlap += w * pulse.envelope(t) * a_out;
    };
    accumulate(0, &y, 0.0);
    for k in 0..steps {
        let t = k as f64 * h;
        let (f0, fm, f1) = (pulse.envelope(t), pulse.envelope(t + 0.5 * h), pulse.envelope(t + h));
        let k1 = derivative(&y, f0, params, couplings);
        let k2 = derivative(&axpy(&y, 0.5 * h, &k1), fm, params, couplings);
        let k3 = derivative(&axpy(&y, 0.5 * h, &k2), fm, params, couplings);
        let k4 = derivative(&axpy(&y, h, &k3), f1, params, couplings);
        for j in 0..3 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        accumulate(k + 1, &y, t + h);
    }
    let norm_sq = norm * h / 3.0;
    let overlap = overlap * h / 3.0;
    let eta = if pulse.alpha.norm() == 0.0 { 0.0 } else { (1.0 - norm_sq).clamp(0.0, 1.0) };
    Ok(TimeDomainResult { amp_ratio: C64::from_polar(norm_sq.sqrt(), overlap.arg()), eta, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{propagate_pulse, PulseKind};

    #[test]
    fn bare_cavity_matches_frequency_route() {
        let p = CavityParams::reference();
        let pulse = PulseSpec::gaussian(200.0 / p.kappa, 1.0, PulseKind::Coherent);
        let td = integrate_langevin(&pulse, &p, [0.0, 0.0]).unwrap();
        let fd = propagate_pulse(&pulse, &p, 0).unwrap();
        assert!((td.amp_ratio - fd.amp_ratio).norm() < 1e-4, "{td:?} vs {fd:?}");
        assert!(td.eta < 1e-6);
    }

    #[test]
    fn one_coupled_atom_matches_frequency_route() {
        let p = CavityParams::reference();
        let pulse = PulseSpec::gaussian(200.0 / p.kappa, 1.0, PulseKind::Coherent);
        let td = integrate_langevin(&pulse, &p, [p.g, 0.0]).unwrap();
        let fd = propagate_pulse(&pulse, &p, 1).unwrap();
        assert!((td.amp_ratio - fd.amp_ratio).norm() < 1e-4, "{td:?} vs {fd:?}");
        assert!((td.eta - fd.eta).abs() < 1e-4);
    }
}
