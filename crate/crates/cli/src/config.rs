//! Scenario configuration files.
//!
//! One TOML file per scenario. Rates are entered as `ν` in MHz and converted
//! with `ω = 2πν`; times are in μs; distances in μm. Every section is optional
//! and falls back to the reference parameters.

use std::path::Path;

use dfs_core::cavity::{CavityParams, CouplingScaling, PulseKind, PulseShape, PulseSpec, MHZ};
use dfs_core::noise::{NoiseSpectrum, SpectrumModel, TransportNoise};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

const US: f64 = 1e-6;
const UM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    FidelitySweep,
    GSweep,
    Decoupling,
    TransportNoise,
    ProtocolRun,
    LeakageDemo,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::FidelitySweep => "fidelity-sweep",
            ScenarioKind::GSweep => "g-sweep",
            ScenarioKind::Decoupling => "decoupling",
            ScenarioKind::TransportNoise => "transport-noise",
            ScenarioKind::ProtocolRun => "protocol-run",
            ScenarioKind::LeakageDemo => "leakage-demo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ScenarioKind::FidelitySweep,
            ScenarioKind::GSweep,
            ScenarioKind::Decoupling,
            ScenarioKind::TransportNoise,
            ScenarioKind::ProtocolRun,
            ScenarioKind::LeakageDemo,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

/// Evenly spaced grid `from → to` with `points` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.from],
            n => (0..n).map(|k| self.from + (self.to - self.from) * k as f64 / (n - 1) as f64).collect(),
        }
    }

    fn validate(&self, what: &str) -> Result<(), CliError> {
        if self.points == 0 || !self.from.is_finite() || !self.to.is_finite() {
            return Err(CliError::Config(format!("{what}: grid must be non-empty and finite")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavityConfig {
    pub g_mhz: f64,
    pub kappa_mhz: f64,
    pub gamma_mhz: f64,
}

impl Default for CavityConfig {
    fn default() -> Self {
        Self { g_mhz: 27.0, kappa_mhz: 2.4, gamma_mhz: 2.6 }
    }
}

impl CavityConfig {
    pub fn params(&self) -> Result<CavityParams, CliError> {
        if !(self.g_mhz > 0.0 && self.kappa_mhz > 0.0 && self.gamma_mhz > 0.0) {
            return Err(CliError::Config("cavity rates must be > 0".into()));
        }
        CavityParams::from_mhz(self.g_mhz, self.kappa_mhz, self.gamma_mhz).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_params(p: &CavityParams) -> Self {
        Self { g_mhz: p.g / MHZ, kappa_mhz: p.kappa / MHZ, gamma_mhz: p.gamma / MHZ }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    /// Pulse duration; `200/κ` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_us: Option<f64>,
    pub alpha: f64,
    pub kind: PulseKind,
    /// Envelope samples on an even grid over the duration, rescaled to unit norm.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self { duration_us: None, alpha: 1.26, kind: PulseKind::OddCat, samples: None }
    }
}

impl PulseConfig {
    pub fn spec(&self, params: &CavityParams) -> Result<PulseSpec, CliError> {
        let duration = match self.duration_us {
            Some(t) if t > 0.0 && t.is_finite() => t * US,
            Some(t) => return Err(CliError::Config(format!("pulse duration {t} μs"))),
            None => 200.0 / params.kappa,
        };
        if !self.alpha.is_finite() {
            return Err(CliError::Config("pulse alpha must be finite".into()));
        }
        let mut spec = PulseSpec::gaussian(duration, self.alpha, self.kind);
        if let Some(values) = &self.samples {
            spec.shape = PulseShape::normalized_samples(values.clone(), duration).map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    Single,
    Both,
}

impl From<Scaling> for CouplingScaling {
    fn from(s: Scaling) -> Self {
        match s {
            Scaling::Single => CouplingScaling::Single,
            Scaling::Both => CouplingScaling::Both,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub nbar: Grid,
    pub g_ratio: Grid,
    pub g_scaling: Scaling,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            nbar: Grid { from: 0.1, to: 4.0, points: 20 },
            g_ratio: Grid { from: 1.0, to: 0.5, points: 11 },
            g_scaling: Scaling::Single,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    BandLimitedWhite,
    Lorentzian,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub model: ModelName,
    pub tau_co_us: f64,
    pub cutoff_mhz: f64,
    /// Two-column `ω S` file for `model = "table"`, relative to the config.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { model: ModelName::BandLimitedWhite, tau_co_us: 1000.0, cutoff_mhz: 1e-4, table: None }
    }
}

impl NoiseConfig {
    pub fn spectrum(&self, base: Option<&Path>) -> Result<NoiseSpectrum, CliError> {
        let bad = |e: dfs_core::noise::NoiseError| CliError::Config(e.to_string());
        match self.model {
            ModelName::Table => {
                let name = self.table.as_ref().ok_or_else(|| CliError::Config("table model needs `table`".into()))?;
                let path = base.map(|b| b.join(name)).unwrap_or_else(|| name.into());
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                NoiseSpectrum::parse_table(&text).map_err(bad)
            }
            m => {
                if !(self.tau_co_us > 0.0 && self.cutoff_mhz > 0.0) {
                    return Err(CliError::Config("noise tau_co_us and cutoff_mhz must be > 0".into()));
                }
                let model = if m == ModelName::Lorentzian { SpectrumModel::Lorentzian } else { SpectrumModel::BandLimitedWhite };
                NoiseSpectrum::from_coherence_time(model, self.tau_co_us * US, self.cutoff_mhz * MHZ).map_err(bad)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecouplingConfig {
    pub delta_t_us: Vec<f64>,
    pub n_cycles: usize,
    pub realizations: usize,
}

impl Default for DecouplingConfig {
    fn default() -> Self {
        Self { delta_t_us: vec![10.0, 20.0, 40.0, 80.0, 159.154_943_091_895_35], n_cycles: 1, realizations: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    pub distance_um: f64,
    pub tau_t_us: Vec<f64>,
    pub realizations: usize,
    /// Narrow test line at `ω₀ = line_omega_tau / τ_T`.
    pub line_omega_tau: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self { distance_um: 10.0, tau_t_us: vec![100.0], realizations: 1000, line_omega_tau: 0.05 }
    }
}

impl TransportConfig {
    pub fn noise(&self, tau_t_us: f64, spectrum: NoiseSpectrum) -> Result<TransportNoise, CliError> {
        TransportNoise::new(self.distance_um * UM, tau_t_us * US, spectrum).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    TeleportedCnot,
    Hadamard,
    Rotation,
    LogicalCz,
    Bsm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Ideal,
    Noisy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    pub trials: usize,
    pub mode: RunMode,
    /// Homodyne probe amplitude for label errors in noisy mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homodyne_alpha: Option<f64>,
    /// Realistic cavity CZ in noisy mode.
    pub cavity_cz: bool,
    /// Transport dephasing in noisy mode.
    pub transport_noise: bool,
    /// `(α, β, ς)` for the rotation protocol.
    pub angles: [f64; 3],
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            kind: ProtocolKind::TeleportedCnot,
            trials: 100,
            mode: RunMode::Ideal,
            homodyne_alpha: None,
            cavity_cz: false,
            transport_noise: false,
            angles: [0.0, std::f64::consts::FRAC_PI_4, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeakageConfig {
    pub trials: usize,
}

impl Default for LeakageConfig {
    fn default() -> Self {
        Self { trials: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub cavity: CavityConfig,
    #[serde(default)]
    pub pulse: PulseConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub decoupling: DecouplingConfig,
    #[serde(default)]
    pub transport: TransportConfig,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub leakage: LeakageConfig,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            seed: 0,
            output: None,
            cavity: CavityConfig::default(),
            pulse: PulseConfig::default(),
            sweep: SweepConfig::default(),
            noise: NoiseConfig::default(),
            decoupling: DecouplingConfig::default(),
            transport: TransportConfig::default(),
            protocol: ProtocolConfig::default(),
            leakage: LeakageConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let params = self.cavity.params()?;
        self.pulse.spec(&params)?;
        match self.scenario {
            ScenarioKind::FidelitySweep => {
                self.sweep.nbar.validate("sweep.nbar")?;
                if self.sweep.nbar.values().iter().any(|&n| n < 0.0) {
                    return Err(CliError::Config("sweep.nbar must be ≥ 0".into()));
                }
            }
            ScenarioKind::GSweep => {
                self.sweep.g_ratio.validate("sweep.g_ratio")?;
                if self.sweep.g_ratio.values().iter().any(|&r| r <= 0.0) {
                    return Err(CliError::Config("sweep.g_ratio must be > 0".into()));
                }
            }
            ScenarioKind::Decoupling => {
                let d = &self.decoupling;
                if d.delta_t_us.is_empty() || d.delta_t_us.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
                    return Err(CliError::Config("decoupling.delta_t_us must be non-empty and > 0".into()));
                }
                if d.n_cycles == 0 || d.realizations < 100 {
                    return Err(CliError::Config("decoupling needs n_cycles ≥ 1 and realizations ≥ 100".into()));
                }
            }
            ScenarioKind::TransportNoise => {
                let t = &self.transport;
                if t.tau_t_us.is_empty() || t.tau_t_us.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(CliError::Config("transport.tau_t_us must be non-empty and > 0".into()));
                }
                if !(t.distance_um > 0.0) || t.realizations == 0 || !(t.line_omega_tau > 0.0) {
                    return Err(CliError::Config("transport needs distance_um, realizations, line_omega_tau > 0".into()));
                }
            }
            ScenarioKind::ProtocolRun => {
                if self.protocol.trials == 0 {
                    return Err(CliError::Config("protocol.trials must be ≥ 1".into()));
                }
            }
            ScenarioKind::LeakageDemo => {
                if self.leakage.trials == 0 {
                    return Err(CliError::Config("leakage.trials must be ≥ 1".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_reference_defaults() {
        let cfg = ScenarioConfig::from_toml("scenario = \"fidelity-sweep\"\nseed = 3\n").unwrap();
        assert_eq!(cfg.seed, 3);
        let p = cfg.cavity.params().unwrap();
        assert_eq!(p, CavityParams::reference());
        let pulse = cfg.pulse.spec(&p).unwrap();
        assert!((pulse.duration * p.kappa - 200.0).abs() < 1e-9);
        assert_eq!(cfg.sweep.nbar.values().len(), 20);
    }

    #[test]
    fn round_trip_is_lossless() {
        for kind in ["fidelity-sweep", "g-sweep", "decoupling", "transport-noise", "protocol-run", "leakage-demo"] {
            let mut cfg = ScenarioConfig::new(ScenarioKind::parse(kind).unwrap());
            cfg.pulse.duration_us = Some(13.0);
            cfg.protocol.homodyne_alpha = Some(1.5);
            let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.hash(), cfg.hash());
        }
    }

    #[test]
    fn kappa_units() {
        let c = CavityConfig { kappa_mhz: 2.4, ..Default::default() };
        let p = c.params().unwrap();
        assert!((p.kappa - 2.0 * std::f64::consts::PI * 2.4e6).abs() < 1e-6);
        assert!((CavityConfig::from_params(&p).kappa_mhz - 2.4).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for text in [
            "scenario = \"nope\"",
            "scenario = \"g-sweep\"\n[cavity]\nkappa_mhz = -1.0\n",
            "scenario = \"fidelity-sweep\"\n[sweep]\nnbar = { from = 0.1, to = 4.0, points = 0 }\n",
            "scenario = \"decoupling\"\n[decoupling]\nrealizations = 10\n",
            "scenario = \"protocol-run\"\nbogus = 1\n",
        ] {
            assert!(matches!(ScenarioConfig::from_toml(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn grid_endpoints() {
        let g = Grid { from: 1.0, to: 0.5, points: 11 };
        let v = g.values();
        assert_eq!(v[0], 1.0);
        assert_eq!(v[10], 0.5);
    }
}
