//! CSV rows, JSON report and run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use stablelab::estimators::ExperimentReport;

use crate::config::Resolved;
use crate::error::CliError;

pub const CSV_HEADER: [&str; 11] = [
    "experiment",
    "param_hash",
    "seed",
    "point_index",
    "x_coords",
    "estimate",
    "stderr",
    "n",
    "statistic",
    "statistic_err",
    "pass",
];

/// First 16 hex digits of SHA-256 over the experiment name and the
/// resolved configuration without the seed.
pub fn param_hash(experiment: &str, config: &Resolved) -> String {
    let mut h = Sha256::new();
    h.update(format!("experiment={experiment}\n"));
    for (k, v) in config.values() {
        if k != "run.seed" {
            h.update(format!("{k}={v}\n"));
        }
    }
    hex::encode(h.finalize())[..16].to_string()
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// One row per point estimate, then one row per statistic. Point rows put
/// the point label in `statistic`; statistic rows leave the point columns
/// empty and carry the value in `estimate`.
pub fn write_csv(path: &Path, experiment: &str, hash: &str, seed: u64, report: Option<&ExperimentReport>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Config(format!("{}: {e}", path.display()));
    w.write_record(CSV_HEADER).map_err(io)?;
    if let Some(rep) = report {
        let pass = rep.pass.to_string();
        let seed = seed.to_string();
        for (i, p) in rep.points.iter().enumerate() {
            let x: Vec<String> = p.point.iter().map(|v| num(*v)).collect();
            w.write_record([
                experiment,
                hash,
                &seed,
                &i.to_string(),
                &x.join(" "),
                &num(p.estimate.mean),
                &num(p.estimate.stderr),
                &p.estimate.n.to_string(),
                &p.label,
                "",
                &pass,
            ])
            .map_err(io)?;
        }
        for s in &rep.statistics {
            w.write_record([experiment, hash, &seed, "", "", &num(s.value), "", "", &s.name, &num(s.stderr), &pass])
                .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    param_hash: &'a str,
    config: &'a std::collections::BTreeMap<String, String>,
    error: Option<&'a str>,
    report: Option<&'a ExperimentReport>,
}

pub fn write_json(path: &Path, hash: &str, config: &Resolved, report: Option<&ExperimentReport>, error: Option<&str>) -> Result<(), CliError> {
    let doc = JsonReport {
        param_hash: hash,
        config: config.values(),
        error,
        report,
    };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Serialize)]
pub struct Manifest {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: String,
    pub experiment: String,
    pub param_hash: String,
    pub seed: u64,
    pub workers: usize,
    /// Resolved configuration; `stablelab experiment <name> --config`
    /// on these values reproduces the run.
    pub config: std::collections::BTreeMap<String, String>,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub pass: bool,
    pub exit_code: i32,
    pub error: Option<String>,
    pub outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }
}

/// `v` with 15 significant digits.
pub fn sig15(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-5..15).contains(&mag) {
        format!("{:.*}", (14 - mag).max(0) as usize, v)
    } else {
        format!("{v:.14e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig15(1.0 / (2.0 * std::f64::consts::PI)), "0.159154943091895");
        assert_eq!(sig15(1234.5), "1234.50000000000");
        assert_eq!(sig15(0.0), "0");
        assert_eq!(sig15(1e-9), "1.00000000000000e-9");
    }

    #[test]
    fn hash_ignores_seed() {
        let keys = [crate::config::SEED_KEY, crate::config::key("experiment.n", "1", "")];
        let mut a = Resolved::load(None, &keys).unwrap();
        let h = param_hash("x", &a);
        a.set("run.seed", 99);
        assert_eq!(param_hash("x", &a), h);
        a.set("experiment.n", 2);
        assert_ne!(param_hash("x", &a), h);
        assert_ne!(param_hash("y", &a), h);
    }
}
