//! Trial configuration, presets and the canonical hash.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use period_core::hodge::HodgeNumbers;
use period_core::orbit::PolydiscConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub weight: usize,
    pub hodge_numbers: Vec<usize>,
}

impl FrameSpec {
    pub fn numbers(&self) -> period_core::Result<HodgeNumbers> {
        HodgeNumbers::new(self.weight, self.hodge_numbers.clone())
    }
}

/// Tolerance names understood by the pipeline, with defaults.
pub const DEFAULT_TOLERANCES: [(&str, f64); 12] = [
    ("coord", 1e-12),
    ("distance", 1e-9),
    ("hr_min_eigenvalue", 0.9),
    ("jacobi", 1e-10),
    ("killing_definite", 1e-8),
    ("killing_norm", 1e-8),
    ("l_uniqueness", 1e-10),
    ("q_preservation", 1e-9),
    ("reduction", 1e-8),
    ("reduction_success", 0.95),
    ("sl2", 1e-10),
    ("tanh", 1e-9),
];

fn default_tolerances() -> BTreeMap<String, f64> {
    DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn default_t_grid() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0]
}

fn default_samples() -> usize {
    1000
}

fn default_lambda_range() -> f64 {
    2.0
}

fn default_flag_samples() -> usize {
    500
}

fn default_sl2_samples() -> usize {
    100
}

fn default_reduction_trials() -> usize {
    100
}

fn default_z_radius() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub frame: FrameSpec,
    #[serde(default)]
    pub seed: u64,
    /// Polydisc samples.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default = "default_lambda_range")]
    pub lambda_range: f64,
    #[serde(default = "default_flag_samples")]
    pub flag_samples: usize,
    #[serde(default = "default_sl2_samples")]
    pub sl2_samples: usize,
    #[serde(default = "default_z_radius")]
    pub z_radius: f64,
    #[serde(default = "default_reduction_trials")]
    pub reduction_trials: usize,
    /// Overrides merged over the defaults.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("unknown preset `{0}` (expected one of sl2, sp4, k3toy, nonhermitian)")]
    UnknownPreset(String),
}

fn field(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        message: message.into(),
    }
}

pub const PRESET_NAMES: [&str; 4] = ["sl2", "sp4", "k3toy", "nonhermitian"];

impl TrialConfig {
    pub fn new(frame: FrameSpec) -> Self {
        Self {
            frame,
            seed: 0,
            samples: default_samples(),
            t_grid: default_t_grid(),
            lambda_range: default_lambda_range(),
            flag_samples: default_flag_samples(),
            sl2_samples: default_sl2_samples(),
            z_radius: default_z_radius(),
            reduction_trials: default_reduction_trials(),
            tolerances: BTreeMap::new(),
            output: None,
        }
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let (weight, h): (usize, &[usize]) = match name {
            "sl2" => (1, &[1, 1]),
            "sp4" => (1, &[2, 2]),
            "k3toy" => (2, &[1, 2, 1]),
            "nonhermitian" => (2, &[2, 2, 2]),
            other => return Err(ConfigError::UnknownPreset(other.to_string())),
        };
        Ok(Self::new(FrameSpec {
            weight,
            hodge_numbers: h.to_vec(),
        }))
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("malformed trial config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.frame
            .numbers()
            .map_err(|e| field("frame.hodge_numbers", e.to_string()))?;
        if self.samples < 1 {
            return Err(field("samples", "must be at least 1"));
        }
        if self.t_grid.is_empty() {
            return Err(field("t_grid", "must not be empty"));
        }
        for (i, t) in self.t_grid.iter().enumerate() {
            if !(t.is_finite() && *t >= 0.0) {
                return Err(field(format!("t_grid[{i}]"), format!("must be a finite value >= 0, got {t}")));
            }
        }
        if !(self.lambda_range.is_finite() && self.lambda_range > 0.0) {
            return Err(field("lambda_range", "must be a finite value > 0"));
        }
        if !(self.z_radius.is_finite() && self.z_radius > 0.0) {
            return Err(field("z_radius", "must be a finite value > 0"));
        }
        for (name, v) in &self.tolerances {
            if !DEFAULT_TOLERANCES.iter().any(|(k, _)| k == name) {
                return Err(field(format!("tolerances.{name}"), "unknown tolerance"));
            }
            if !(v.is_finite() && *v > 0.0) {
                return Err(field(format!("tolerances.{name}"), format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Tolerance by name, falling back to the default.
    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances
            .get(name)
            .copied()
            .or_else(|| DEFAULT_TOLERANCES.iter().find(|(k, _)| *k == name).map(|(_, v)| *v))
            .unwrap_or_else(|| panic!("unknown tolerance {name}"))
    }

    /// All tolerances after merging overrides.
    pub fn effective_tolerances(&self) -> BTreeMap<String, f64> {
        let mut out = default_tolerances();
        out.extend(self.tolerances.iter().map(|(k, v)| (k.clone(), *v)));
        out
    }

    pub fn polydisc(&self) -> PolydiscConfig {
        PolydiscConfig {
            samples: self.samples,
            t_grid: self.t_grid.clone(),
            lambda_range: self.lambda_range,
            seed: self.seed,
            coord_tol: self.tol("coord"),
            tanh_tol: self.tol("tanh"),
            distance_tol: self.tol("distance"),
            q_tol: self.tol("q_preservation"),
        }
    }

    /// JSON with sorted keys, merged tolerances and no output path.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.tolerances = self.effective_tolerances();
        c.output = None;
        let value = serde_json::to_value(&c).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Resolves `--config` / `--preset`; with both, the file wins.
pub fn resolve(config: Option<&Path>, preset: Option<&str>) -> anyhow::Result<TrialConfig> {
    match (config, preset) {
        (Some(path), _) => TrialConfig::load(path),
        (None, Some(name)) => Ok(TrialConfig::preset(name)?),
        (None, None) => anyhow::bail!("one of --config or --preset is required"),
    }
}
