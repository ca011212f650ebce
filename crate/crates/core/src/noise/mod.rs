//! Stochastic dephasing, the echo sequence `[Δt, U_x, Δt, U_x]` and transport
//! noise.
//!
//! Spectra are two-sided: `S(−ω) = S(ω)` and the variance of the noise
//! `ε(t)` is `∫_{−∞}^{∞} S(ω) dω`. A phase `∫ w(t) ε(t) dt` then has variance
//! `∫ S(ω) |w̃(ω)|² dω` with `w̃(ω) = ∫ w(t) e^{iωt} dt`.

mod decoupling;
mod synthesis;
mod transport;

pub use decoupling::{
    analytic_echo_variance, analytic_free_variance, apply_dephasing_channel, echo_filter_weight,
    filter_function_dfs, monte_carlo_dephasing, suppression_slope, DephasingStats, EchoSequence,
};
pub use synthesis::{periodogram, synthesize_noise, NoiseRealization, DEFAULT_BINS};
pub use transport::{
    bare_phase_variance, encoded_phase_variance, narrow_line_suppression, transport_spectrum, TransportNoise,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("invalid noise spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("sampling step {dt} s violates Nyquist for band limit {band} rad/s")]
    Nyquist { dt: f64, band: f64 },
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Logical(#[from] crate::logical::LogicalError),
}

pub type Result<T> = std::result::Result<T, NoiseError>;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumModel {
    /// `S = P/(2ω_c)` for `|ω| ≤ ω_c`.
    BandLimitedWhite,
    /// `S = (P/π) ω_c/(ω² + ω_c²)`.
    Lorentzian,
    /// `(ω, S)` rows for `ω ≥ 0`, linearly interpolated, zero beyond the last row.
    Table(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseSpectrum {
    pub model: SpectrumModel,
    /// `∫S dω` in rad²/s².
    pub total_power: f64,
    /// `ω_c` in rad/s.
    pub cutoff: f64,
}

/// Composite Simpson rule with `n` (rounded up to even) panels.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Simpson on `[a, b]` refined until two successive levels agree to `tol`
/// (relative).
pub(crate) fn converged_simpson_tol(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    n0: usize,
    tol: f64,
    what: &str,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut n = n0.max(16);
    let mut prev = simpson(&f, a, b, n);
    while n < 1 << 22 {
        n *= 2;
        let next = simpson(&f, a, b, n);
        if (next - prev).abs() <= tol * next.abs().max(prev.abs()) + 1e-300 {
            return Ok(next);
        }
        prev = next;
    }
    Err(NoiseError::NonConvergence(format!("{what} on [{a:e}, {b:e}] with {n} panels")))
}

pub(crate) fn converged_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n0: usize, what: &str) -> Result<f64> {
    converged_simpson_tol(f, a, b, n0, 1e-9, what)
}

/// Sum of converged Simpson integrals over `[lo, hi]` split at `breaks`.
pub(crate) fn integrate_piecewise(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    scale: f64,
    tol: f64,
    what: &str,
) -> Result<f64> {
    let mut pts: Vec<f64> = std::iter::once(lo)
        .chain(breaks.iter().copied().filter(|&b| b > lo && b < hi))
        .chain(std::iter::once(hi))
        .collect();
    pts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in pts.windows(2) {
        if w[1] - w[0] <= 1e-12 * w[0].abs().max(w[1].abs()) {
            continue;
        }
        let n = ((w[1] - w[0]) / scale * 20.0).ceil() as usize;
        total += converged_simpson_tol(&f, w[0], w[1], n.clamp(32, 1 << 16), tol, what)?;
    }
    Ok(total)
}

impl NoiseSpectrum {
    pub fn new(model: SpectrumModel, total_power: f64, cutoff: f64) -> Result<Self> {
        let s = Self { model, total_power, cutoff };
        s.validate()?;
        Ok(s)
    }

    /// Total power `1/τ_co²`.
    pub fn from_coherence_time(model: SpectrumModel, tau_co: f64, cutoff: f64) -> Result<Self> {
        if !(tau_co > 0.0 && tau_co.is_finite()) {
            return Err(NoiseError::InvalidSpectrum(format!("coherence time {tau_co}")));
        }
        let s = Self::new(model, 1.0 / (tau_co * tau_co), cutoff)?;
        if cutoff * tau_co > 0.1 {
            log::warn!("ω_c·τ_co = {:.3} is not small compared to one", cutoff * tau_co);
        }
        Ok(s)
    }

    /// Table spectrum; `total_power` is its integral.
    pub fn from_table(rows: Vec<(f64, f64)>) -> Result<Self> {
        let mut s = Self { model: SpectrumModel::Table(rows), total_power: 0.0, cutoff: 0.0 };
        s.validate_table()?;
        if let SpectrumModel::Table(rows) = &s.model {
            s.cutoff = rows.last().map(|r| r.0).unwrap_or(0.0);
            s.total_power = 2.0
                * rows.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum::<f64>();
        }
        Ok(s)
    }

    /// Two-column whitespace-separated `ω S` text; `#` starts a comment.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| NoiseError::InvalidSpectrum(format!("line {}: {e}", k + 1)))?;
            if cols.len() != 2 {
                return Err(NoiseError::InvalidSpectrum(format!("line {}: expected two columns", k + 1)));
            }
            rows.push((cols[0], cols[1]));
        }
        Self::from_table(rows)
    }

    /// Identically zero spectrum.
    pub fn zero() -> Self {
        Self { model: SpectrumModel::BandLimitedWhite, total_power: 0.0, cutoff: 1.0 }
    }

    fn validate_table(&self) -> Result<()> {
        if let SpectrumModel::Table(rows) = &self.model {
            if rows.len() < 2 {
                return Err(NoiseError::InvalidSpectrum("table needs at least two rows".into()));
            }
            for w in rows.windows(2) {
                if !(w[1].0 > w[0].0) {
                    return Err(NoiseError::InvalidSpectrum("table frequencies must increase".into()));
                }
            }
            if rows[0].0 < 0.0 || rows.iter().any(|r| !(r.1 >= 0.0 && r.1.is_finite())) {
                return Err(NoiseError::InvalidSpectrum("table needs ω ≥ 0 and finite S ≥ 0".into()));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_power >= 0.0 && self.total_power.is_finite()) {
            return Err(NoiseError::InvalidSpectrum(format!("total power {}", self.total_power)));
        }
        match self.model {
            SpectrumModel::Table(_) => self.validate_table(),
            _ if !(self.cutoff > 0.0 && self.cutoff.is_finite()) => {
                Err(NoiseError::InvalidSpectrum(format!("cutoff {}", self.cutoff)))
            }
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.total_power == 0.0
    }

    /// `S(ω)`.
    pub fn density(&self, omega: f64) -> f64 {
        let w = omega.abs();
        let p = self.total_power;
        match &self.model {
            SpectrumModel::BandLimitedWhite => {
                if w <= self.cutoff {
                    p / (2.0 * self.cutoff)
                } else {
                    0.0
                }
            }
            SpectrumModel::Lorentzian => p / std::f64::consts::PI * self.cutoff / (w * w + self.cutoff * self.cutoff),
            SpectrumModel::Table(rows) => {
                if w < rows[0].0 || w > rows[rows.len() - 1].0 {
                    return 0.0;
                }
                let k = rows.partition_point(|r| r.0 <= w).clamp(1, rows.len() - 1);
                let (a, b) = (rows[k - 1], rows[k]);
                a.1 + (b.1 - a.1) * (w - a.0) / (b.0 - a.0)
            }
        }
    }

    /// Upper edge of the support, if bounded.
    pub fn band_limit(&self) -> Option<f64> {
        match &self.model {
            SpectrumModel::BandLimitedWhite => Some(self.cutoff),
            SpectrumModel::Lorentzian => None,
            SpectrumModel::Table(rows) => Some(rows[rows.len() - 1].0),
        }
    }

    /// Frequencies in `[0, ∞)` where `S` has kinks or jumps.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        match &self.model {
            SpectrumModel::BandLimitedWhite => vec![0.0, self.cutoff],
            SpectrumModel::Lorentzian => vec![0.0],
            SpectrumModel::Table(rows) => {
                let mut v: Vec<f64> = rows.iter().map(|r| r.0).collect();
                if v[0] > 0.0 {
                    v.insert(0, 0.0);
                }
                v
            }
        }
    }

    /// `∫_{−∞}^{∞} S(ω) g(ω) dω` for even `g`. `scale` is the smallest
    /// frequency scale on which `g` varies.
    pub fn integrate(&self, g: impl Fn(f64) -> f64, scale: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let f = |w: f64| self.density(w) * g(w);
        let mut total = 0.0;
        let mut edges = self.breakpoints();
        if matches!(self.model, SpectrumModel::Lorentzian) {
            let outer = 1e3 * self.cutoff;
            edges.extend((1..=30).map(|k| outer * k as f64 / 30.0));
            for w in edges.windows(2) {
                let n = ((w[1] - w[0]) / scale * 20.0).ceil() as usize;
                total += converged_simpson(f, w[0], w[1], n.clamp(64, 1 << 20), "spectral integral")?;
            }
            // tail via ω = ω_c tan u: S dω = (P/π) du, bounded g assumed
            let u0 = (outer / self.cutoff).atan();
            let gt = |u: f64| {
                if u >= std::f64::consts::FRAC_PI_2 {
                    0.0
                } else {
                    self.total_power / std::f64::consts::PI * g(self.cutoff * u.tan())
                }
            };
            total += simpson(gt, u0, std::f64::consts::FRAC_PI_2, 4096);
        } else {
            for w in edges.windows(2) {
                let n = ((w[1] - w[0]) / scale * 20.0).ceil() as usize;
                total += converged_simpson(f, w[0], w[1], n.clamp(64, 1 << 20), "spectral integral")?;
            }
        }
        Ok(2.0 * total)
    }

    /// `∫_{a}^{b} S(ω) dω` over `0 ≤ a < b`.
    pub(crate) fn band_power(&self, a: f64, b: f64) -> f64 {
        match &self.model {
            SpectrumModel::BandLimitedWhite => {
                let hi = b.min(self.cutoff);
                if hi <= a {
                    0.0
                } else {
                    (hi - a) * self.total_power / (2.0 * self.cutoff)
                }
            }
            SpectrumModel::Lorentzian => {
                self.total_power / std::f64::consts::PI * ((b / self.cutoff).atan() - (a / self.cutoff).atan())
            }
            SpectrumModel::Table(_) => simpson(|w| self.density(w), a, b, 32),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectra_integrate_to_total_power() {
        for model in [SpectrumModel::BandLimitedWhite, SpectrumModel::Lorentzian] {
            let s = NoiseSpectrum::new(model, 3.0, 50.0).unwrap();
            let p = s.integrate(|_| 1.0, 50.0).unwrap();
            assert!((p / 3.0 - 1.0).abs() < 1e-2, "{p}");
        }
        let t = NoiseSpectrum::from_table(vec![(0.0, 1.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert!((t.total_power - 3.0).abs() < 1e-12);
        assert!((t.integrate(|_| 1.0, 0.1).unwrap() - 3.0).abs() < 1e-9);
        assert!((t.density(-1.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn white_density_and_band_power() {
        let s = NoiseSpectrum::new(SpectrumModel::BandLimitedWhite, 2.0, 10.0).unwrap();
        assert!((s.density(3.0) - 0.1).abs() < 1e-15);
        assert_eq!(s.density(10.5), 0.0);
        assert!((2.0 * s.band_power(0.0, 20.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn coherence_time_sets_total_power() {
        let s = NoiseSpectrum::from_coherence_time(SpectrumModel::BandLimitedWhite, 1e-3, 2.0 * std::f64::consts::PI * 100.0)
            .unwrap();
        assert!((s.total_power - 1e6).abs() < 1e-6);
    }

    #[test]
    fn table_parsing() {
        let s = NoiseSpectrum::parse_table("# omega S\n0 2\n1 2 # flat\n\n2 0\n").unwrap();
        assert!((s.total_power - 6.0).abs() < 1e-12);
        assert!(NoiseSpectrum::parse_table("0 1\n1").is_err());
        assert!(NoiseSpectrum::parse_table("1 1\n0 1").is_err());
        assert!(NoiseSpectrum::parse_table("0 -1\n1 1").is_err());
    }

    #[test]
    fn invalid_spectra() {
        assert!(NoiseSpectrum::new(SpectrumModel::Lorentzian, -1.0, 1.0).is_err());
        assert!(NoiseSpectrum::new(SpectrumModel::BandLimitedWhite, 1.0, 0.0).is_err());
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 2);
        assert!((v - 0.0).abs() < 1e-14);
    }
}
