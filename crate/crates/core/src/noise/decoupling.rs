use rayon::prelude::*;

use super::synthesis::{NoiseRealization, DEFAULT_BINS};
use super::{NoiseError, NoiseSpectrum, Result};
use crate::logical::{apply_logical_unitary, u_z, LogicalQubit};
use crate::qsim::{QuantumRegister, RngSeed};

/// `[Δt, U_x, Δt, U_x]` repeated `n_cycles` times.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EchoSequence {
    pub delta_t: f64,
    pub n_cycles: u32,
}

impl EchoSequence {
    pub fn new(delta_t: f64, n_cycles: u32) -> Result<Self> {
        if !(delta_t > 0.0 && delta_t.is_finite()) || n_cycles == 0 {
            return Err(NoiseError::InvalidParameter(format!("Δt = {delta_t}, cycles = {n_cycles}")));
        }
        Ok(Self { delta_t, n_cycles })
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.delta_t * self.n_cycles as f64
    }
}

/// `sin⁴(Δt ω/2)/(Δt ω)²`, zero at `ω = 0`.
pub fn filter_function_dfs(omega: f64, delta_t: f64) -> f64 {
    let x = (delta_t * omega).abs();
    if x == 0.0 {
        return 0.0;
    }
    (0.5 * x).sin().powi(4) / (x * x)
}

/// `|w̃(ω)|²` of the echo weight over `n` cycles:
/// `16 Δt² F(ω, Δt) · sin²(nωΔt)/sin²(ωΔt)`.
pub fn echo_filter_weight(omega: f64, seq: &EchoSequence) -> f64 {
    let dt = seq.delta_t;
    let n = seq.n_cycles as f64;
    let x = omega * dt;
    let s = x.sin();
    let repeat = if s.abs() < 1e-12 { n * n } else { ((n * x).sin() / s).powi(2) };
    16.0 * dt * dt * filter_function_dfs(omega, dt) * repeat
}

fn free_weight(omega: f64, duration: f64) -> f64 {
    if omega == 0.0 {
        return duration * duration;
    }
    4.0 * (0.5 * omega * duration).sin().powi(2) / (omega * omega)
}

/// `∫ S(ω) |w̃_echo(ω)|² dω`.
pub fn analytic_echo_variance(seq: &EchoSequence, s: &NoiseSpectrum) -> Result<f64> {
    s.integrate(|w| echo_filter_weight(w, seq), std::f64::consts::PI / seq.duration())
}

/// `∫ S(ω) 4 sin²(ωτ/2)/ω² dω` over the sequence duration `τ`.
pub fn analytic_free_variance(seq: &EchoSequence, s: &NoiseSpectrum) -> Result<f64> {
    let tau = seq.duration();
    s.integrate(|w| free_weight(w, tau), std::f64::consts::PI / tau)
}

/// Monte Carlo phase statistics with the analytic values alongside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingStats {
    pub realizations: usize,
    pub echo_variance: f64,
    pub echo_stderr: f64,
    pub free_variance: f64,
    pub free_stderr: f64,
    pub analytic_echo: f64,
    pub analytic_free: f64,
}

impl DephasingStats {
    /// `(MC − analytic)/stderr` for the echo variance.
    pub fn echo_z_score(&self) -> f64 {
        if self.echo_stderr == 0.0 {
            return if self.echo_variance == self.analytic_echo { 0.0 } else { f64::INFINITY };
        }
        (self.echo_variance - self.analytic_echo) / self.echo_stderr
    }

    pub fn free_z_score(&self) -> f64 {
        if self.free_stderr == 0.0 {
            return if self.free_variance == self.analytic_free { 0.0 } else { f64::INFINITY };
        }
        (self.free_variance - self.analytic_free) / self.free_stderr
    }
}

/// Mean of `x²` (zero-mean estimator) and its standard error.
fn second_moment(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let sq: Vec<f64> = values.iter().map(|x| x * x).collect();
    let mean = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample echo and free phases over `n_realizations` independent noise
/// realizations. Realization `k` draws from stream `k` of `seed`.
///
/// Echo phase: `Σ_cycles [∫_{first Δt} ε − ∫_{second Δt} ε]`; free phase:
/// `∫ε` over the same total time.
pub fn monte_carlo_dephasing(
    seq: &EchoSequence,
    s: &NoiseSpectrum,
    n_realizations: usize,
    seed: RngSeed,
) -> Result<DephasingStats> {
    s.validate()?;
    if n_realizations < 100 {
        return Err(NoiseError::InvalidParameter(format!("{n_realizations} realizations, need ≥ 100")));
    }
    let band = NoiseRealization::default_band(s, None);
    let phases: Vec<(f64, f64)> = (0..n_realizations)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.stream(k as u64);
            let real = NoiseRealization::draw(s, band, DEFAULT_BINS, &mut rng);
            let dt = seq.delta_t;
            let echo: f64 = (0..seq.n_cycles)
                .map(|c| {
                    let t0 = 2.0 * dt * c as f64;
                    real.integral(t0, t0 + dt) - real.integral(t0 + dt, t0 + 2.0 * dt)
                })
                .sum();
            (echo, real.integral(0.0, seq.duration()))
        })
        .collect();
    let echo: Vec<f64> = phases.iter().map(|p| p.0).collect();
    let free: Vec<f64> = phases.iter().map(|p| p.1).collect();
    let (echo_variance, echo_stderr) = second_moment(&echo);
    let (free_variance, free_stderr) = second_moment(&free);
    Ok(DephasingStats {
        realizations: n_realizations,
        echo_variance,
        echo_stderr,
        free_variance,
        free_stderr,
        analytic_echo: analytic_echo_variance(seq, s)?,
        analytic_free: analytic_free_variance(seq, s)?,
    })
}

/// Least-squares slope of `log(echo/free)` against `log Δt` for one-cycle
/// sequences.
pub fn suppression_slope(s: &NoiseSpectrum, delta_ts: &[f64]) -> Result<f64> {
    if delta_ts.len() < 2 {
        return Err(NoiseError::InvalidParameter("need at least two Δt values".into()));
    }
    let mut pts = Vec::with_capacity(delta_ts.len());
    for &dt in delta_ts {
        let seq = EchoSequence::new(dt, 1)?;
        let ratio = analytic_echo_variance(&seq, s)? / analytic_free_variance(&seq, s)?;
        pts.push((dt.ln(), ratio.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// `exp(−iφ(σ_z ⊗ I − I ⊗ σ_z)/2)` on `(atom_a, atom_b)`, i.e. `exp(−iφ Z_L)`
/// on the logical subspace and identity on leakage.
pub fn apply_dephasing_channel(reg: &mut QuantumRegister, q: LogicalQubit, phi: f64) -> Result<()> {
    apply_logical_unitary(reg, q, &u_z(phi))?;
    Ok(())
}
