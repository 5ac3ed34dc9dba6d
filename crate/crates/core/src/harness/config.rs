//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # comment
//! rule = max
//! d = 3
//! k = 3
//! horizon = 1000000
//! replicas = 20
//! seed = 7
//! checkpoint_ratio = 1.05
//! window_lo = 10000
//! window_hi = 1000000
//! out_dir = runs/d3
//! ```
//!
//! Every key is optional in the file; missing keys take the defaults of
//! [`ExperimentConfig::default`], except that the slope window defaults to
//! `[horizon / 100, horizon]`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::process::{ModelConfig, Rule};
use crate::stats::{format_float, DEFAULT_CHECKPOINT_RATIO};

pub const CONFIG_KEYS: [&str; 10] = [
    "rule",
    "d",
    "k",
    "horizon",
    "replicas",
    "seed",
    "checkpoint_ratio",
    "window_lo",
    "window_hi",
    "out_dir",
];

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub rule: Rule,
    pub d: u32,
    pub k: usize,
    pub horizon: u64,
    pub replicas: u64,
    pub seed: u64,
    pub checkpoint_ratio: f64,
    pub window_lo: u64,
    pub window_hi: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rule: Rule::Max,
            d: 3,
            k: 3,
            horizon: 1_000_000,
            replicas: 20,
            seed: 1,
            checkpoint_ratio: DEFAULT_CHECKPOINT_RATIO,
            window_lo: 10_000,
            window_hi: 1_000_000,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Partially specified configuration: file values overlaid by flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub rule: Option<Rule>,
    pub d: Option<u32>,
    pub k: Option<usize>,
    pub horizon: Option<u64>,
    pub replicas: Option<u64>,
    pub seed: Option<u64>,
    pub checkpoint_ratio: Option<f64>,
    pub window_lo: Option<u64>,
    pub window_hi: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for key {key}")))
}

impl ConfigOverrides {
    /// Parses the `key = value` format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = ConfigOverrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "rule" => o.rule = Some(value.parse()?),
                "d" => o.d = Some(parse_value(key, value)?),
                "k" => o.k = Some(parse_value(key, value)?),
                "horizon" => o.horizon = Some(parse_value(key, value)?),
                "replicas" => o.replicas = Some(parse_value(key, value)?),
                "seed" => o.seed = Some(parse_value(key, value)?),
                "checkpoint_ratio" => o.checkpoint_ratio = Some(parse_value(key, value)?),
                "window_lo" => o.window_lo = Some(parse_value(key, value)?),
                "window_hi" => o.window_hi = Some(parse_value(key, value)?),
                "out_dir" => o.out_dir = Some(PathBuf::from(value)),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(o)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Values of `top` win over values of `self`.
    pub fn overlay(self, top: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            rule: top.rule.or(self.rule),
            d: top.d.or(self.d),
            k: top.k.or(self.k),
            horizon: top.horizon.or(self.horizon),
            replicas: top.replicas.or(self.replicas),
            seed: top.seed.or(self.seed),
            checkpoint_ratio: top.checkpoint_ratio.or(self.checkpoint_ratio),
            window_lo: top.window_lo.or(self.window_lo),
            window_hi: top.window_hi.or(self.window_hi),
            out_dir: top.out_dir.or(self.out_dir),
        }
    }

    /// Fills in defaults and validates.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let def = ExperimentConfig::default();
        let horizon = self.horizon.unwrap_or(def.horizon);
        let cfg = ExperimentConfig {
            rule: self.rule.unwrap_or(def.rule),
            d: self.d.unwrap_or(def.d),
            k: self.k.unwrap_or(def.k),
            horizon,
            replicas: self.replicas.unwrap_or(def.replicas),
            seed: self.seed.unwrap_or(def.seed),
            checkpoint_ratio: self.checkpoint_ratio.unwrap_or(def.checkpoint_ratio),
            window_lo: self
                .window_lo
                .unwrap_or((horizon / 100).max(1).min(horizon.saturating_sub(1))),
            window_hi: self.window_hi.unwrap_or(horizon),
            out_dir: self.out_dir.unwrap_or(def.out_dir),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model(0).validate()?;
        if self.replicas < 1 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if !(self.checkpoint_ratio > 1.0) || !self.checkpoint_ratio.is_finite() {
            return Err(Error::Config(format!(
                "checkpoint_ratio must exceed 1, got {}",
                self.checkpoint_ratio
            )));
        }
        if !(self.window_lo < self.window_hi && self.window_hi <= self.horizon) {
            return Err(Error::Config(format!(
                "slope window needs window_lo < window_hi <= horizon, got [{}, {}] with horizon {}",
                self.window_lo, self.window_hi, self.horizon
            )));
        }
        Ok(())
    }

    /// Model configuration of replica `index`.
    pub fn model(&self, index: u64) -> ModelConfig {
        ModelConfig {
            rule: self.rule,
            d: self.d,
            horizon: self.horizon,
            k: self.k,
            seed: crate::rng::replica_seed(self.seed, index),
        }
    }

    /// The configuration in the file format, keys in canonical order.
    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rule = {}", self.rule);
        let _ = writeln!(s, "d = {}", self.d);
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "horizon = {}", self.horizon);
        let _ = writeln!(s, "replicas = {}", self.replicas);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "checkpoint_ratio = {}", format_float(self.checkpoint_ratio));
        let _ = writeln!(s, "window_lo = {}", self.window_lo);
        let _ = writeln!(s, "window_hi = {}", self.window_hi);
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        s
    }
}
