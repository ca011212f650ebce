use rand::Rng;
use rustfft::FftPlanner;

use super::{NoiseError, NoiseSpectrum, Result};
use crate::linalg::C64;

/// Frequency bins used by [`NoiseRealization::draw`] unless overridden.
pub const DEFAULT_BINS: usize = 512;

/// One realization `ε(t) = Σ_k a_k cos(ω_k t + φ_k)`.
///
/// The band `[0, Ω]` is cut into equal bins. Each bin contributes one cosine
/// with a uniformly jittered frequency inside the bin, a uniform random phase
/// and amplitude `√(4 ∫_bin S dω)`, so the ensemble spectrum is the
/// bin-averaged `S` and the variance is `∫S dω`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    pub amplitudes: Vec<f64>,
    pub omegas: Vec<f64>,
    pub phases: Vec<f64>,
}

impl NoiseRealization {
    /// Draw a realization covering `[0, band]`. Consumes two uniforms per bin
    /// (frequency jitter, then phase) in bin order.
    pub fn draw<R: Rng + ?Sized>(s: &NoiseSpectrum, band: f64, bins: usize, rng: &mut R) -> Self {
        let bins = bins.max(1);
        let width = band / bins as f64;
        let mut out = Self {
            amplitudes: Vec::with_capacity(bins),
            omegas: Vec::with_capacity(bins),
            phases: Vec::with_capacity(bins),
        };
        for k in 0..bins {
            let jitter: f64 = rng.random();
            let phase: f64 = rng.random();
            let lo = k as f64 * width;
            let power = if s.is_zero() { 0.0 } else { s.band_power(lo, lo + width) };
            out.amplitudes.push((4.0 * power).sqrt());
            out.omegas.push(lo + jitter * width);
            out.phases.push(2.0 * std::f64::consts::PI * phase);
        }
        out
    }

    /// Band used for `s`: its support (`1000 ω_c` for unbounded models),
    /// clipped to `nyquist`.
    pub fn default_band(s: &NoiseSpectrum, nyquist: Option<f64>) -> f64 {
        let band = s.band_limit().unwrap_or(1e3 * s.cutoff);
        match nyquist {
            Some(n) => band.min(n),
            None => band,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.omegas)
            .zip(&self.phases)
            .map(|((a, w), p)| a * (w * t + p).cos())
            .sum()
    }

    /// `ε(j·dt)` for `j < n`, by phasor rotation.
    pub fn sample(&self, n: usize, dt: f64) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for ((&a, &w), &p) in self.amplitudes.iter().zip(&self.omegas).zip(&self.phases) {
            let step = C64::from_polar(1.0, w * dt);
            let mut z = C64::from_polar(a, p);
            for (j, v) in out.iter_mut().enumerate() {
                if j % 256 == 0 {
                    z = C64::from_polar(a, w * dt * j as f64 + p);
                }
                *v += z.re;
                z *= step;
            }
        }
        out
    }

    /// Exact `∫_{t0}^{t1} ε dt`.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.omegas)
            .zip(&self.phases)
            .map(|((a, &w), &p)| {
                if w * (t1 - t0).abs() < 1e-8 {
                    a * (0.5 * w * (t0 + t1) + p).cos() * (t1 - t0)
                } else {
                    // sin(x1) − sin(x0) = 2 cos((x1+x0)/2) sin((x1−x0)/2)
                    2.0 * a * (0.5 * w * (t0 + t1) + p).cos() * (0.5 * w * (t1 - t0)).sin() / w
                }
            })
            .sum()
    }

    /// Sample variance expected from the amplitudes, `Σ a_k²/2`.
    pub fn power(&self) -> f64 {
        self.amplitudes.iter().map(|a| 0.5 * a * a).sum()
    }
}

/// Sample `ε(j·dt)` for `j = 0, …, ⌊duration/dt⌋ − 1`.
pub fn synthesize_noise<R: Rng + ?Sized>(s: &NoiseSpectrum, duration: f64, dt: f64, rng: &mut R) -> Result<Vec<f64>> {
    s.validate()?;
    if !(dt > 0.0 && duration > 0.0 && dt.is_finite() && duration.is_finite()) {
        return Err(NoiseError::InvalidParameter(format!("duration {duration}, dt {dt}")));
    }
    let nyquist = std::f64::consts::PI / dt;
    let band = s.band_limit().unwrap_or(s.cutoff);
    if band >= nyquist {
        return Err(NoiseError::Nyquist { dt, band });
    }
    let n = (duration / dt).floor() as usize;
    if s.is_zero() {
        return Ok(vec![0.0; n]);
    }
    let real = NoiseRealization::draw(s, NoiseRealization::default_band(s, Some(nyquist)), DEFAULT_BINS, rng);
    Ok(real.sample(n, dt))
}

/// Two-sided periodogram `(ω_k, dt |X_k|²/(2πN))` for `k = 0, …, N/2`.
pub fn periodogram(trace: &[f64], dt: f64) -> Vec<(f64, f64)> {
    let n = trace.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<C64> = trace.iter().map(|&x| C64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let norm = dt / (2.0 * std::f64::consts::PI * n as f64);
    (0..=n / 2)
        .map(|k| (2.0 * std::f64::consts::PI * k as f64 / (n as f64 * dt), norm * buf[k].norm_sqr()))
        .collect()
}
