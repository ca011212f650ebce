//! Summaries of previously written run directories.

use std::fs;
use std::path::Path;

use crate::CliError;

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// usable points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Parsed CSV artifact: `# key: value` metadata plus header and rows.
#[derive(Debug, Clone, Default)]
pub struct Artifact {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Artifact {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let meta = text
            .lines()
            .filter_map(|l| l.strip_prefix("# "))
            .filter_map(|l| l.split_once(": "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| CliError::Io(e.to_string()))?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for r in rdr.records() {
            rows.push(r.map_err(|e| CliError::Io(e.to_string()))?.iter().map(String::from).collect());
        }
        Ok(Self { meta, header, rows })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r.get(i).and_then(|s| s.parse().ok()).unwrap_or(f64::NAN)).collect())
    }
}

/// One summary line per CSV artifact under `dir` (searched one level deep).
pub fn report(dir: &Path) -> Result<Vec<String>, CliError> {
    let mut files = Vec::new();
    let mut visit = |d: &Path| -> Result<(), CliError> {
        let rd = fs::read_dir(d).map_err(|e| CliError::Io(format!("{}: {e}", d.display())))?;
        for entry in rd.flatten() {
            let p = entry.path();
            if p.extension().is_some_and(|e| e == "csv") {
                files.push(p);
            } else if p.is_dir() {
                for sub in fs::read_dir(&p).into_iter().flatten().flatten() {
                    if sub.path().extension().is_some_and(|e| e == "csv") {
                        files.push(sub.path());
                    }
                }
            }
        }
        Ok(())
    };
    visit(dir)?;
    files.sort();
    if files.is_empty() {
        return Err(CliError::Io(format!("{}: no CSV artifacts", dir.display())));
    }
    let mut lines = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f).map_err(|e| CliError::Io(format!("{}: {e}", f.display())))?;
        let a = Artifact::parse(&text)?;
        let scenario = a.get("scenario").unwrap_or("unknown").to_string();
        let mut line = format!("{}: {scenario}, {} rows", f.display(), a.rows.len());
        for key in [
            "reference_fidelity",
            "monotone",
            "max_abs_delta_f",
            "max_abs_z",
            "suppression_slope",
            "max_trace_distance",
            "mean_fidelity",
            "max_verdict_deviation",
            "min_restored_fidelity",
        ] {
            if let Some(v) = a.get(key) {
                line.push_str(&format!(", {key}={v}"));
            }
        }
        lines.push(line);
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|k| (k as f64, 3.0 * (k as f64).powi(2))).collect();
        assert!((log_log_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert!(log_log_slope(&pts[..1]).is_none());
    }

    #[test]
    fn parse_artifact() {
        let a = Artifact::parse("# scenario: g-sweep\n# units: x=1\nx,y\n1,2\n3,4\n").unwrap();
        assert_eq!(a.get("scenario"), Some("g-sweep"));
        assert_eq!(a.column("y").unwrap(), vec![2.0, 4.0]);
    }

    #[test]
    fn empty_dir_is_error() {
        let d = tempfile::tempdir().unwrap();
        assert!(report(d.path()).is_err());
    }
}
