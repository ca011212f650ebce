//! Scenario runner: TOML configs in, CSV artifacts and acceptance checks out.

pub mod config;
pub mod output;
pub mod report;
pub mod scenarios;

use std::path::Path;

use dfs_core::cavity::CavityError;
use dfs_core::noise::NoiseError;
use dfs_core::protocols::ProtocolError;
use dfs_core::RngSeed;

pub use config::{ScenarioConfig, ScenarioKind};
pub use output::{write_artifacts, Check, ScenarioOutput, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("numerical: {0}")]
    Numerical(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

impl From<CavityError> for CliError {
    fn from(e: CavityError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<NoiseError> for CliError {
    fn from(e: NoiseError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

/// Independent seed for grid point or trial `k` (splitmix64 of `seed ⊕ k`).
pub fn sub_seed(seed: u64, k: u64) -> RngSeed {
    let mut z = seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x632b_e59b_d9b4_e019);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    RngSeed(z ^ (z >> 31))
}

/// Run one scenario, write its artifacts into `out_dir` and return the checks.
/// With `check` set, a failed check becomes [`CliError::Check`].
pub fn run_scenario(cfg: &ScenarioConfig, base: Option<&Path>, out_dir: &Path, check: bool) -> Result<Vec<Check>, CliError> {
    let out = scenarios::run(cfg, base)?;
    write_artifacts(out_dir, cfg, &out)?;
    if check {
        let failed: Vec<String> = out.checks.iter().filter(|c| !c.pass).map(Check::line).collect();
        if !failed.is_empty() {
            return Err(CliError::Check(failed.join("; ")));
        }
    }
    Ok(out.checks)
}
