//! Artifacts: CSV with `# key: value` metadata lines, a run manifest and a
//! gnuplot script stub.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x}"),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// One pass/fail comparison against an acceptance threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, detail: String, pass: bool) -> Self {
        Self { name: name.to_string(), detail, pass }
    }

    pub fn line(&self) -> String {
        format!("{}: {}: {}", self.name, self.detail, if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Columns `(name, unit)` and rows of one scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns.iter().map(|(n, u)| (n.to_string(), u.to_string())).collect(),
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    /// CSV text with the metadata header.
    pub fn to_csv(&self, cfg: &ScenarioConfig) -> Result<String, CliError> {
        let mut out = String::new();
        let _ = writeln!(out, "# scenario: {}", cfg.scenario.as_str());
        let _ = writeln!(out, "# seed: {}", cfg.seed);
        let _ = writeln!(out, "# config_hash: {}", cfg.hash());
        let _ = writeln!(out, "# version: {}", env!("CARGO_PKG_VERSION"));
        let units: Vec<String> = self.columns.iter().map(|(n, u)| format!("{n}={u}")).collect();
        let _ = writeln!(out, "# units: {}", units.join(" "));
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.0.as_str())).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))?);
        Ok(out)
    }
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

/// Everything a scenario produced.
#[derive(Debug, Clone, Default)]
pub struct ScenarioOutput {
    pub table: Table,
    pub checks: Vec<Check>,
    /// Extra text artifacts `(file name, contents)`.
    pub extra: Vec<(String, String)>,
    /// `x:y` column numbers for the plot stub.
    pub plot: (usize, usize),
}

#[derive(Debug, Serialize)]
struct ManifestFile {
    name: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    scenario: String,
    seed: u64,
    config_hash: String,
    version: String,
    files: Vec<ManifestFile>,
}

fn gnuplot_stub(csv_name: &str, table: &Table, plot: (usize, usize)) -> String {
    let name = |k: usize| table.columns.get(k - 1).map(|c| c.0.clone()).unwrap_or_default();
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{}'\nset ylabel '{}'\nplot '{}' using {}:{} with linespoints\n",
        name(plot.0),
        name(plot.1),
        csv_name,
        plot.0,
        plot.1
    )
}

/// Write CSV, extras, plot stub, effective config and manifest into `dir`.
pub fn write_artifacts(dir: &Path, cfg: &ScenarioConfig, out: &ScenarioOutput) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let stem = cfg.scenario.as_str();
    let csv_name = format!("{stem}.csv");
    let mut files: Vec<(String, String)> = vec![(csv_name.clone(), out.table.to_csv(cfg)?)];
    files.extend(out.extra.iter().cloned());
    files.push((format!("{stem}.gp"), gnuplot_stub(&csv_name, &out.table, out.plot)));
    files.push(("config.toml".into(), cfg.to_toml()));
    let mut written = Vec::new();
    let mut manifest = Manifest {
        scenario: stem.to_string(),
        seed: cfg.seed,
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        files: Vec::new(),
    };
    for (name, text) in &files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        manifest.files.push(ManifestFile { name: name.clone(), sha256: hex::encode(Sha256::digest(text.as_bytes())) });
        written.push(path);
    }
    let path = dir.join("manifest.toml");
    let text = toml::to_string(&manifest).map_err(io)?;
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    written.push(path);
    Ok(written)
}
