use std::sync::Arc;

use rustfft::FftPlanner;

use super::{cavity_response, polarization_response, CavityError, CavityParams, Result};
use crate::linalg::{C64, ZERO};

/// Number of spectral samples.
pub const GRID_SAMPLES: usize = 4096;
/// Spectral window width in standard deviations of `|f̃(ω)|²`.
pub const WINDOW_STDS: f64 = 16.0;

/// Temporal envelope of the input pulse on `[0, T]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum PulseShape {
    /// `f(t) ∝ exp[−(t − T/2)²/(T/5)²]`.
    Gaussian,
    /// Samples on a uniform grid spanning `[0, T]` (endpoints included),
    /// linearly interpolated. Must satisfy `∫|f|²dt = 1`.
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    Coherent,
    OddCat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    pub duration: f64,
    pub shape: PulseShape,
    pub alpha: C64,
    pub kind: PulseKind,
}

/// Exact `∫(piecewise-linear f)² dt`.
fn samples_norm(values: &[f64], dt: f64) -> f64 {
    values.windows(2).map(|w| dt / 3.0 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1])).sum()
}

impl PulseShape {
    /// Validated sample table.
    pub fn samples(values: Vec<f64>, duration: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(CavityError::InvalidPulse("need at least two samples".into()));
        }
        let dt = duration / (values.len() - 1) as f64;
        let norm = samples_norm(&values, dt);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(CavityError::NonNormalizedShape(norm));
        }
        Ok(PulseShape::Samples(values))
    }

    /// Sample table rescaled to unit norm.
    pub fn normalized_samples(values: Vec<f64>, duration: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(CavityError::InvalidPulse("need at least two samples".into()));
        }
        let dt = duration / (values.len() - 1) as f64;
        let norm = samples_norm(&values, dt);
        if !(norm > 0.0) {
            return Err(CavityError::NonNormalizedShape(norm));
        }
        let s = norm.sqrt();
        Ok(PulseShape::Samples(values.into_iter().map(|v| v / s).collect()))
    }
}

impl PulseSpec {
    /// Gaussian odd-cat pulse of duration `T`.
    pub fn gaussian(duration: f64, alpha: f64, kind: PulseKind) -> Self {
        Self { duration, shape: PulseShape::Gaussian, alpha: C64::new(alpha, 0.0), kind }
    }

    /// `T = 200/κ` Gaussian odd-cat pulse.
    pub fn reference(params: &CavityParams, alpha: f64) -> Self {
        Self::gaussian(200.0 / params.kappa, alpha, PulseKind::OddCat)
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn with_alpha(&self, alpha: C64) -> Self {
        Self { alpha, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(CavityError::InvalidPulse(format!("duration {}", self.duration)));
        }
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(CavityError::InvalidPulse("non-finite amplitude".into()));
        }
        if let PulseShape::Samples(values) = &self.shape {
            PulseShape::samples(values.clone(), self.duration)?;
        }
        Ok(())
    }

    fn gaussian_width(&self) -> f64 {
        self.duration / 5.0
    }

    /// Normalized envelope `f(t)`; zero outside `[0, T]`.
    pub fn envelope(&self, t: f64) -> f64 {
        let big_t = self.duration;
        if !(0.0..=big_t).contains(&t) {
            return 0.0;
        }
        match &self.shape {
            PulseShape::Gaussian => {
                let w = self.gaussian_width();
                let half = big_t / 2.0;
                // ∫_0^T exp(−2(t−T/2)²/w²) dt = w √(π/2) erf(√2 T/(2w))
                let norm = w * (std::f64::consts::PI / 2.0).sqrt()
                    * statrs::function::erf::erf(std::f64::consts::SQRT_2 * half / w);
                (-(t - half).powi(2) / (w * w)).exp() / norm.sqrt()
            }
            PulseShape::Samples(values) => {
                let step = big_t / (values.len() - 1) as f64;
                let x = t / step;
                let k = (x.floor() as usize).min(values.len() - 2);
                let frac = x - k as f64;
                values[k] * (1.0 - frac) + values[k + 1] * frac
            }
        }
    }

    /// Standard deviation of `|f̃(ω)|²` (rad/s).
    pub fn spectral_std(&self) -> f64 {
        match &self.shape {
            PulseShape::Gaussian => 1.0 / self.gaussian_width(),
            PulseShape::Samples(values) => {
                let step = self.duration / (values.len() - 1) as f64;
                let mut ext = Vec::with_capacity(values.len() + 2);
                ext.push(0.0);
                ext.extend_from_slice(values);
                ext.push(0.0);
                let grad: f64 = ext.windows(2).map(|w| (w[1] - w[0]).powi(2) / step).sum();
                grad.sqrt()
            }
        }
    }
}

/// Time and frequency grid holding the discretized input mode.
///
/// `GRID_SAMPLES` points span a spectral window of `WINDOW_STDS` standard
/// deviations of the pulse spectrum. The time step is `2π/W` and the pulse is
/// centred in the time window. Inner products use the time-domain measure
/// `⟨x, y⟩ = Σ x̄_j y_j dt`, evaluated in frequency space by Parseval.
#[derive(Clone)]
pub struct SpectralGrid {
    pub times: Vec<f64>,
    pub omegas: Vec<f64>,
    pub dt: f64,
    /// Normalized input envelope samples.
    pub input: Vec<C64>,
    /// Input spectrum (unnormalized DFT).
    pub spectrum: Vec<C64>,
    fft_forward: Arc<dyn rustfft::Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid").field("n", &self.times.len()).field("dt", &self.dt).finish()
    }
}

impl SpectralGrid {
    pub fn new(pulse: &PulseSpec) -> Result<Self> {
        pulse.validate()?;
        let n = GRID_SAMPLES;
        let window = WINDOW_STDS * pulse.spectral_std();
        let dt = 2.0 * std::f64::consts::PI / window;
        let t0 = pulse.duration / 2.0 - (n / 2) as f64 * dt;
        let times: Vec<f64> = (0..n).map(|j| t0 + j as f64 * dt).collect();
        let mut input: Vec<C64> = times.iter().map(|&t| C64::new(pulse.envelope(t), 0.0)).collect();
        let norm = (input.iter().map(|z| z.norm_sqr()).sum::<f64>() * dt).sqrt();
        if !(norm > 0.0) {
            return Err(CavityError::InvalidPulse("pulse not resolved by the spectral grid".into()));
        }
        for z in &mut input {
            *z /= norm;
        }
        let omegas: Vec<f64> = (0..n)
            .map(|k| {
                let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                2.0 * std::f64::consts::PI * kk / (n as f64 * dt)
            })
            .collect();
        let mut planner = FftPlanner::new();
        // components ∝ e^{−iωt}: analysis uses e^{+iωt}, i.e. the inverse DFT
        let inverse = planner.plan_fft_inverse(n);
        let fft_forward = planner.plan_fft_forward(n);
        let mut spectrum = input.clone();
        inverse.process(&mut spectrum);
        Ok(Self { times, omegas, dt, input, spectrum, fft_forward })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Parseval weight turning `Σ x̄_k y_k` over spectra into `⟨x, y⟩`.
    pub fn spectral_weight(&self) -> f64 {
        self.dt / self.len() as f64
    }

    pub fn inner_spectral(&self, x: &[C64], y: &[C64]) -> C64 {
        x.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<C64>() * self.spectral_weight()
    }

    /// Multiply the input spectrum by `response(ω)`.
    pub fn filtered(&self, response: impl Fn(f64) -> C64) -> Vec<C64> {
        self.spectrum.iter().zip(&self.omegas).map(|(s, &w)| s * response(w)).collect()
    }

    /// Time-domain samples of a spectrum.
    pub fn to_time(&self, spectrum: &[C64]) -> Vec<C64> {
        let mut out = spectrum.to_vec();
        self.fft_forward.process(&mut out);
        let n = self.len() as f64;
        for z in &mut out {
            *z /= n;
        }
        out
    }
}

/// Output of one reflection: the reflected mode plus the reservoir modes of
/// the two cavity atoms, all as spectra on a [`SpectralGrid`]. For an input
/// coherent state `|α f⟩` the output is `|α h⟩ ⊗ |α l_1⟩ ⊗ |α l_2⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodeField {
    pub reflected: Vec<C64>,
    pub reservoir: [Vec<C64>; 2],
}

impl MultimodeField {
    /// Reflection with the two cavity atoms coupled with `couplings[i]` when
    /// `coupled[i]` is set.
    pub fn reflect(grid: &SpectralGrid, params: &CavityParams, couplings: [f64; 2], coupled: [bool; 2]) -> Self {
        let g: [f64; 2] = [0, 1].map(|i| if coupled[i] { couplings[i] } else { 0.0 });
        let g_sq = g[0] * g[0] + g[1] * g[1];
        let (kappa, gamma) = (params.kappa, params.gamma);
        let cavity: Vec<C64> = grid.omegas.iter().map(|&w| cavity_response(w, kappa, gamma, g_sq)).collect();
        let reflected =
            grid.spectrum.iter().zip(&cavity).map(|(s, a)| s * (crate::linalg::ONE + kappa.sqrt() * a)).collect();
        let reservoir = [0, 1].map(|i| {
            if g[i] == 0.0 {
                vec![ZERO; grid.len()]
            } else {
                grid.spectrum
                    .iter()
                    .zip(&cavity)
                    .zip(&grid.omegas)
                    .map(|((s, &a), &w)| s * gamma.sqrt() * polarization_response(w, gamma, g[i], a))
                    .collect()
            }
        });
        Self { reflected, reservoir }
    }

    /// Input mode times `sign` with vacuum reservoirs.
    pub fn ideal(grid: &SpectralGrid, sign: f64) -> Self {
        Self {
            reflected: grid.spectrum.iter().map(|s| s * sign).collect(),
            reservoir: [vec![ZERO; grid.len()], vec![ZERO; grid.len()]],
        }
    }

    /// Mode inner product summed over the reflected and reservoir modes.
    pub fn inner(&self, grid: &SpectralGrid, other: &Self) -> C64 {
        grid.inner_spectral(&self.reflected, &other.reflected)
            + grid.inner_spectral(&self.reservoir[0], &other.reservoir[0])
            + grid.inner_spectral(&self.reservoir[1], &other.reservoir[1])
    }

    pub fn norm_sqr(&self, grid: &SpectralGrid) -> f64 {
        self.inner(grid, self).re
    }

    pub fn reflected_norm_sqr(&self, grid: &SpectralGrid) -> f64 {
        grid.inner_spectral(&self.reflected, &self.reflected).re
    }
}

/// Summary of the reflected mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionResult {
    /// Normalized output envelope on the grid times.
    pub out_shape: Vec<C64>,
    /// `α′/α`: magnitude `‖h‖`, phase `arg⟨f_in, h⟩`.
    pub amp_ratio: C64,
    /// `1 − |α′/α|²`.
    pub eta: f64,
    /// `⟨f_in, out_shape⟩`.
    pub mode_overlap: C64,
}

impl ReflectionResult {
    pub(crate) fn from_spectrum(grid: &SpectralGrid, reflected: &[C64], alpha: C64) -> Self {
        let norm_sq = grid.inner_spectral(reflected, reflected).re;
        let overlap = grid.inner_spectral(&grid.spectrum, reflected);
        let norm = norm_sq.sqrt();
        let mut out_shape = grid.to_time(reflected);
        if norm > 0.0 {
            for z in &mut out_shape {
                *z /= norm;
            }
        }
        let theta = overlap.arg();
        let eta = if alpha.norm() == 0.0 { 0.0 } else { (1.0 - norm_sq).clamp(0.0, 1.0) };
        Self {
            out_shape,
            amp_ratio: C64::from_polar(norm, theta),
            eta,
            mode_overlap: if norm > 0.0 { overlap / norm } else { ZERO },
        }
    }
}

/// Reflect `pulse` from the cavity with `n_coupled` atoms of coupling `g`.
pub fn propagate_pulse(pulse: &PulseSpec, params: &CavityParams, n_coupled: u32) -> Result<ReflectionResult> {
    params.validate()?;
    if pulse.duration * params.kappa < 10.0 {
        log::warn!(
            "pulse duration T·κ = {:.2} is not in the narrowband regime (T·κ ≫ 1)",
            pulse.duration * params.kappa
        );
    }
    let grid = SpectralGrid::new(pulse)?;
    let coupled = match n_coupled {
        0 => [false, false],
        1 => [true, false],
        _ => [true, true],
    };
    if n_coupled > 2 {
        return Err(CavityError::InvalidParams(format!("n_coupled = {n_coupled}")));
    }
    let field = MultimodeField::reflect(&grid, params, params.couplings(), coupled);
    Ok(ReflectionResult::from_spectrum(&grid, &field.reflected, pulse.alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::MHZ;

    fn propagate_spectrum(grid: &SpectralGrid, p: &CavityParams) -> Vec<C64> {
        MultimodeField::reflect(grid, p, p.couplings(), [false, false]).reflected
    }

    fn reference_pulse() -> (CavityParams, PulseSpec) {
        let p = CavityParams::reference();
        (p, PulseSpec::reference(&p, 1.26))
    }

    #[test]
    fn gaussian_envelope_is_normalized() {
        let (_, pulse) = reference_pulse();
        let n = 200_000;
        let dt = pulse.duration / n as f64;
        let norm: f64 = (0..=n).map(|k| pulse.envelope(k as f64 * dt).powi(2) * dt).sum();
        assert!((norm - 1.0).abs() < 1e-4);
        let grid = SpectralGrid::new(&pulse).unwrap();
        let discrete: f64 = grid.input.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dt;
        assert!((discrete - 1.0).abs() < 1e-12);
        let spectral = grid.inner_spectral(&grid.spectrum, &grid.spectrum).re;
        assert!((spectral - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sample_tables_must_be_normalized() {
        assert!(matches!(
            PulseShape::samples(vec![2.0, 2.0, 2.0], 1.0),
            Err(CavityError::NonNormalizedShape(_))
        ));
        let shape = PulseShape::normalized_samples(vec![0.0, 1.0, 2.0, 1.0, 0.0], 3.0).unwrap();
        if let PulseShape::Samples(v) = &shape {
            assert!(PulseShape::samples(v.clone(), 3.0).is_ok());
        }
    }

    #[test]
    fn bare_cavity_reflects_inverted_pulse() {
        let (p, pulse) = reference_pulse();
        let res = propagate_pulse(&pulse, &p, 0).unwrap();
        let grid = SpectralGrid::new(&pulse).unwrap();
        let overlap: C64 = grid.input.iter().zip(&res.out_shape).map(|(a, b)| a.conj() * b).sum::<C64>() * grid.dt;
        assert!(res.eta < 1e-3);
        assert!((res.mode_overlap - overlap).norm() < 1e-12);
        // r(ω) ≈ −e^{4iω/κ}: an inverted copy delayed by 4/κ
        let sigma = pulse.spectral_std();
        let expected = (-8.0 * (sigma / p.kappa).powi(2)).exp();
        assert!(overlap.re < 0.0);
        assert!((overlap.norm() - expected).abs() < 2e-4, "{overlap}");
        let delay = 4.0 / p.kappa;
        let delayed: Vec<C64> = grid
            .spectrum
            .iter()
            .zip(&grid.omegas)
            .map(|(s, &w)| s * C64::from_polar(1.0, w * delay))
            .collect();
        let matched = grid.inner_spectral(&delayed, &propagate_spectrum(&grid, &p)) / res.amp_ratio.norm();
        assert!(matched.norm() > 0.999 && matched.re < -0.999, "{matched}");
    }

    #[test]
    fn coupled_cavity_loss_scales_as_kappa_gamma_over_g_squared() {
        let (p, pulse) = reference_pulse();
        for n in [1u32, 2] {
            let res = propagate_pulse(&pulse, &p, n).unwrap();
            let expected = p.kappa * p.gamma / (n as f64 * p.g * p.g);
            assert!((res.eta / expected - 1.0).abs() < 0.2, "n = {n}: eta {}", res.eta);
            assert!(res.amp_ratio.arg().abs() < 1e-3);
        }
    }

    #[test]
    fn zero_amplitude_has_no_loss_by_convention() {
        let (p, pulse) = reference_pulse();
        let res = propagate_pulse(&pulse.with_alpha(C64::new(0.0, 0.0)), &p, 1).unwrap();
        assert_eq!(res.eta, 0.0);
    }

    #[test]
    fn reflection_conserves_energy_with_reservoirs() {
        let (p, pulse) = reference_pulse();
        let grid = SpectralGrid::new(&pulse).unwrap();
        let couplings = [p.g, 0.5 * p.g];
        for coupled in [[false, false], [true, false], [false, true], [true, true]] {
            let f = MultimodeField::reflect(&grid, &p, couplings, coupled);
            assert!((f.norm_sqr(&grid) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn short_pulses_still_propagate() {
        let p = CavityParams::from_mhz(27.0, 2.4, 2.6).unwrap();
        let pulse = PulseSpec::gaussian(5.0 / p.kappa, 1.0, PulseKind::Coherent);
        let res = propagate_pulse(&pulse, &p, 0).unwrap();
        assert!(res.eta < 1e-12);
        assert!(res.mode_overlap.norm() < 0.999);
        let _ = MHZ;
    }
}
