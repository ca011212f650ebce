use super::{integrate_piecewise, NoiseError, NoiseSpectrum, Result, SpectrumModel};

/// Kernel half-width in kernel standard deviations.
const KERNEL_SPAN: f64 = 10.0;

/// Noise picked up while two atoms are moved apart over `tau_t`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TransportNoise {
    /// Inter-atom distance `d` in metres.
    pub distance: f64,
    /// Transport time `τ_T` in seconds.
    pub tau_t: f64,
    pub spectrum: NoiseSpectrum,
}

impl TransportNoise {
    pub fn new(distance: f64, tau_t: f64, spectrum: NoiseSpectrum) -> Result<Self> {
        if !(distance > 0.0 && distance.is_finite() && tau_t > 0.0 && tau_t.is_finite()) {
            return Err(NoiseError::InvalidParameter(format!("d = {distance}, τ_T = {tau_t}")));
        }
        spectrum.validate()?;
        Ok(Self { distance, tau_t, spectrum })
    }

    /// `N(x) = exp(−x²/d²)`.
    pub fn spatial_correlation(&self, x: f64) -> f64 {
        (-(x * x) / (self.distance * self.distance)).exp()
    }

    /// Standard deviation `4/τ_T` of the smoothing kernel.
    pub fn kernel_width(&self) -> f64 {
        4.0 / self.tau_t
    }

    /// Upper edge of the support of `S_τT`.
    fn support(&self) -> f64 {
        let band = self.spectrum.band_limit().unwrap_or(1e3 * self.spectrum.cutoff);
        band + KERNEL_SPAN * self.kernel_width()
    }

    fn breaks(&self) -> Vec<f64> {
        let mut b = self.spectrum.breakpoints();
        let neg: Vec<f64> = b.iter().map(|x| -x).collect();
        b.extend(neg);
        b
    }
}

/// `S_τT(ω) = ∫ S(ω − ν) sin²((ω − ν)τ_T/2) K(ν) dν` with `K` a unit-area
/// Gaussian of standard deviation `4/τ_T`.
pub fn transport_spectrum(omega: f64, tn: &TransportNoise) -> Result<f64> {
    spectrum_with_kernel(omega, tn, tn.kernel_width())
}

fn spectrum_with_kernel(omega: f64, tn: &TransportNoise, sigma: f64) -> Result<f64> {
    if tn.spectrum.is_zero() {
        return Ok(0.0);
    }
    let tau = tn.tau_t;
    let span = KERNEL_SPAN * sigma;
    let kernel = |nu: f64| (-0.5 * (nu / sigma).powi(2)).exp() / (2.0 * std::f64::consts::PI * sigma * sigma).sqrt();
    // integrate over u = ω − ν, the argument of S
    let f = |u: f64| tn.spectrum.density(u) * (0.5 * u * tau).sin().powi(2) * kernel(omega - u);
    let scale = (1.0 / tau).min(sigma);
    let (mut lo, mut hi) = (omega - span, omega + span);
    if let Some(band) = tn.spectrum.band_limit() {
        lo = lo.max(-band);
        hi = hi.min(band);
    }
    if hi <= lo {
        return Ok(0.0);
    }
    integrate_piecewise(f, lo, hi, &tn.breaks(), scale, 1e-8, "transport spectrum")
}

fn phase_weight(omega: f64, tau: f64) -> f64 {
    if omega == 0.0 {
        return tau * tau;
    }
    4.0 * (0.5 * omega * tau).sin().powi(2) / (omega * omega)
}

/// Differential phase variance of an encoded pair moved over `τ_T`:
/// `∫ S_τT(ω) 4 sin²(ωτ_T/2)/ω² dω`.
pub fn encoded_phase_variance(tn: &TransportNoise) -> Result<f64> {
    if tn.spectrum.is_zero() {
        return Ok(0.0);
    }
    let tau = tn.tau_t;
    let err = std::cell::RefCell::new(None);
    let f = |w: f64| match transport_spectrum(w, tn) {
        Ok(s) => s * phase_weight(w, tau),
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let breaks: Vec<f64> = (1..8).map(|k| k as f64 * tn.kernel_width()).collect();
    let v = integrate_piecewise(f, 0.0, tn.support(), &breaks, 1.0 / tau, 1e-6, "encoded phase variance");
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(2.0 * v?)
}

/// Phase variance of an unencoded atom over `τ_T`: `∫ S(ω) 4 sin²(ωτ_T/2)/ω² dω`.
pub fn bare_phase_variance(tn: &TransportNoise) -> Result<f64> {
    let tau = tn.tau_t;
    tn.spectrum.integrate(|w| phase_weight(w, tau), 1.0 / tau)
}

/// `∫S_τT dω / ∫S dω` for a narrow triangular line at `±omega0` of half-width
/// `width`, both integrals by quadrature.
pub fn narrow_line_suppression(omega0: f64, width: f64, tau_t: f64) -> Result<f64> {
    if !(width > 0.0 && omega0 > width) {
        return Err(NoiseError::InvalidParameter(format!("line at {omega0} with half-width {width}")));
    }
    let rows = vec![(omega0 - width, 0.0), (omega0, 1.0), (omega0 + width, 0.0)];
    let s = NoiseSpectrum::from_table(rows)?;
    let tn = TransportNoise::new(1.0, tau_t, s.clone())?;
    let err = std::cell::RefCell::new(None);
    let f = |w: f64| match transport_spectrum(w, &tn) {
        Ok(v) => v,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let breaks = [omega0 - width, omega0, omega0 + width];
    let out = 2.0 * integrate_piecewise(f, 0.0, tn.support(), &breaks, tn.kernel_width() / 4.0, 1e-6, "line power")?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    debug_assert!(matches!(s.model, SpectrumModel::Table(_)));
    Ok(out / s.total_power)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn white(power: f64, wc: f64) -> NoiseSpectrum {
        NoiseSpectrum::new(SpectrumModel::BandLimitedWhite, power, wc).unwrap()
    }

    #[test]
    fn spatial_correlation_is_gaussian() {
        let tn = TransportNoise::new(10e-6, 100e-6, white(1.0, 1.0)).unwrap();
        assert_eq!(tn.spatial_correlation(0.0), 1.0);
        assert!((tn.spatial_correlation(10e-6) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn zero_spectrum_gives_zero() {
        let tn = TransportNoise::new(10e-6, 100e-6, NoiseSpectrum::zero()).unwrap();
        assert_eq!(transport_spectrum(3.0, &tn).unwrap(), 0.0);
        assert_eq!(encoded_phase_variance(&tn).unwrap(), 0.0);
    }

    #[test]
    fn narrow_kernel_reduces_to_free_precession_spectrum() {
        // a long transport time makes the kernel narrow compared to S
        let s = white(2.0, 1e3);
        let tau = 1.0;
        let tn = TransportNoise::new(1.0, tau, s.clone()).unwrap();
        for &w in &[100.0, 333.3, 700.0] {
            // the kernel averages sin² over a width 4/τ, so compare with the
            // kernel-averaged value computed in closed form
            let sigma = 4.0 / tau;
            let averaged = s.density(w) * 0.5 * (1.0 - (w * tau).cos() * (-0.5 * (sigma * tau).powi(2)).exp());
            let got = transport_spectrum(w, &tn).unwrap();
            assert!((got - averaged).abs() < 1e-8, "{got} vs {averaged}");
            assert!(got <= s.density(w) + 1e-12);
        }
        // shrinking the kernel alone recovers S(ω) sin²(ωτ_T/2)
        for &w in &[100.0, 333.3, 700.0] {
            let direct = s.density(w) * (0.5 * w * tau).sin().powi(2);
            let got = spectrum_with_kernel(w, &tn, 1e-6).unwrap();
            assert!((got - direct).abs() < 1e-9, "{got} vs {direct}");
        }
    }

    #[test]
    fn high_frequencies_are_not_suppressed() {
        let tau = 1e-4;
        let s = white(1.0, 1e6);
        let tn = TransportNoise::new(1.0, tau, s.clone()).unwrap();
        let ratio = transport_spectrum(5e5, &tn).unwrap() / s.density(5e5);
        assert!((0.3..=0.7).contains(&ratio), "{ratio}");
    }

    #[test]
    fn narrow_line_ratio_is_sin_squared() {
        let tau = 100e-6;
        let w0 = 0.05 / tau;
        let ratio = narrow_line_suppression(w0, 1e-3 * w0, tau).unwrap();
        let exact = (0.5 * w0 * tau).sin().powi(2);
        assert!((ratio / exact - 1.0).abs() < 1e-3, "{ratio} vs {exact}");
        assert!((ratio / ((tau * w0).powi(2) / 4.0) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn encoding_beats_bare_qubit() {
        let s = NoiseSpectrum::from_coherence_time(SpectrumModel::BandLimitedWhite, 1e-3, 2.0 * std::f64::consts::PI * 100.0)
            .unwrap();
        let tn = TransportNoise::new(10e-6, 100e-6, s).unwrap();
        let enc = encoded_phase_variance(&tn).unwrap();
        let bare = bare_phase_variance(&tn).unwrap();
        assert!(enc > 0.0 && enc < bare, "{enc} vs {bare}");
        // bare: white noise with ω_c τ ≪ 1 accumulates P τ²
        assert!((bare / (1e6 * 1e-8) - 1.0).abs() < 1e-2);
    }
}
