//! Sectioned `key = value` configuration resolved against declared
//! defaults.

use std::collections::BTreeMap;
use std::path::Path;

use ini::Ini;
use stablelab::estimators::BoundaryData;
use stablelab::geometry::{Domain, Point};
use stablelab::kernels::{BFunction, StableParams};
use stablelab::sampler::WosConfig;

use crate::error::CliError;
use crate::grammar;

/// A recognised key: `section.name`, its default and a one-line help.
#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key { name, default, help }
}

pub const MODEL_KEYS: &[Key] = &[
    key("model.d", "2", "dimension"),
    key("model.alpha", "1", "stability index in (0, 2)"),
    key("model.beta", "0.5", "perturbation index in (0, alpha)"),
    key("model.eps0", "0", "reference perturbation level in [0, 1]"),
    key("model.m1", "1", "constant M1 >= 1"),
    key("model.m2", "1", "constant M2 >= 1"),
    key("model.b", "zero", "perturbation coefficient b"),
];

pub const WOS_KEYS: &[Key] = &[
    key("wos.gamma", "0.5", "ball radius as a fraction of the distance to the boundary"),
    key("wos.max_steps", "10000", "steps before a walk counts as non-terminating"),
];

pub const SEED_KEY: Key = key("run.seed", "1", "base seed; --seed overrides it");

/// Values after applying the file on top of the defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    values: BTreeMap<String, String>,
}

impl Resolved {
    /// Defaults of `keys`, overridden by the file at `path` when given.
    /// Unknown sections and keys are errors.
    pub fn load(path: Option<&Path>, keys: &[Key]) -> Result<Self, CliError> {
        let mut values: BTreeMap<String, String> = keys.iter().map(|k| (k.name.to_string(), k.default.to_string())).collect();
        if let Some(path) = path {
            let ini = Ini::load_from_file(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            for (section, props) in ini.iter() {
                for (k, v) in props.iter() {
                    let full = match section {
                        Some(s) => format!("{s}.{k}"),
                        None => {
                            return Err(CliError::Config(format!(
                                "{}: key '{k}' appears before any [section] header",
                                path.display()
                            )))
                        }
                    };
                    match values.get_mut(&full) {
                        Some(slot) => *slot = v.trim().to_string(),
                        None => return Err(CliError::Config(format!("{}: unknown key '{full}'", path.display()))),
                    }
                }
            }
        }
        Ok(Self { values })
    }

    pub fn set(&mut self, name: &str, value: impl ToString) {
        self.values.insert(name.to_string(), value.to_string());
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn str(&self, name: &str) -> &str {
        self.values.get(name).map(String::as_str).unwrap_or_else(|| panic!("key '{name}' was not declared"))
    }

    fn parse<T>(&self, name: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<T, CliError> {
        f(self.str(name)).map_err(|e| CliError::Config(format!("{name} = {}: {e}", self.str(name))))
    }

    pub fn f64(&self, name: &str) -> Result<f64, CliError> {
        self.parse(name, grammar::parse_f64)
    }

    pub fn usize(&self, name: &str) -> Result<usize, CliError> {
        self.parse(name, |s| s.parse::<usize>().map_err(|e| e.to_string()))
    }

    pub fn u64(&self, name: &str) -> Result<u64, CliError> {
        self.parse(name, |s| s.parse::<u64>().map_err(|e| e.to_string()))
    }

    pub fn list(&self, name: &str) -> Result<Vec<f64>, CliError> {
        self.parse(name, grammar::parse_list)
    }

    pub fn point(&self, name: &str) -> Result<Point, CliError> {
        let d = self.usize("model.d")?;
        let p = self.parse(name, grammar::parse_point)?;
        if p.dim() != d {
            return Err(CliError::Config(format!("{name} has dimension {}, expected {d}", p.dim())));
        }
        Ok(p)
    }

    pub fn points(&self, name: &str) -> Result<Vec<Point>, CliError> {
        let d = self.usize("model.d")?;
        let ps = self.parse(name, grammar::parse_points)?;
        if ps.is_empty() || ps.iter().any(|p| p.dim() != d) {
            return Err(CliError::Config(format!("{name} must list points of dimension {d}")));
        }
        Ok(ps)
    }

    /// `none` or a number.
    pub fn opt_f64(&self, name: &str) -> Result<Option<f64>, CliError> {
        if self.str(name) == "none" {
            Ok(None)
        } else {
            self.f64(name).map(Some)
        }
    }

    pub fn domain(&self, name: &str) -> Result<Domain, CliError> {
        let d = self.usize("model.d")?;
        self.parse(name, |s| grammar::parse_domain(s, d))
    }

    pub fn data(&self, name: &str) -> Result<BoundaryData, CliError> {
        let d = self.usize("model.d")?;
        let alpha = self.f64("model.alpha")?;
        self.parse(name, |s| grammar::parse_data(s, d, alpha))
    }

    pub fn b(&self, name: &str) -> Result<BFunction, CliError> {
        self.parse(name, grammar::parse_b)
    }

    /// Validated `(d, α, β, ε0, M1, M2)` and `b`.
    pub fn model(&self) -> Result<(StableParams, BFunction), CliError> {
        let params = StableParams::new(
            self.usize("model.d")?,
            self.f64("model.alpha")?,
            self.f64("model.beta")?,
            self.f64("model.eps0")?,
            self.f64("model.m1")?,
            self.f64("model.m2")?,
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let b = self.b("model.b")?;
        b.validate(&params).map_err(|e| CliError::Config(e.to_string()))?;
        Ok((params, b))
    }

    pub fn wos(&self) -> Result<WosConfig, CliError> {
        let cfg = WosConfig {
            gamma: self.f64("wos.gamma")?,
            max_steps: self.usize("wos.max_steps")?,
            record_trace: false,
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// `key = value` lines in key order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (k, v) in &self.values {
            let (s, name) = k.split_once('.').expect("keys are section.name");
            if s != section {
                if !out.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{s}]\n"));
                section = s;
            }
            out.push_str(&format!("{name} = {v}\n"));
        }
        out
    }
}
