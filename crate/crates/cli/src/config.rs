//! Run configuration as read from TOML.

use std::path::{Path, PathBuf};

use lplevel::asymptotics::FormulaId;
use lplevel::measure::EstimatorConfig;
use lplevel::norms::SeminormConfig;
use lplevel::spectral::{ScanConfig, ScanMode, SpectralGrid};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub experiments: Vec<Experiment>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("lplevel-out")
}

/// Geometric grid `start, start·ratio, ...` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricGrid {
    pub start: f64,
    pub ratio: f64,
    pub count: usize,
}

/// One experiment. Which fields apply depends on `formula_id`; fields that
/// do not apply are rejected during validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub name: Option<String>,
    pub formula_id: Option<FormulaId>,
    pub function: Option<String>,
    pub dimension: Option<usize>,
    pub p: Option<f64>,
    pub s: Option<f64>,
    pub q: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub lambda_grid: Option<GeometricGrid>,
    pub s_grid: Option<Vec<f64>>,
    /// Box Ω as one `[lo, hi]` pair per axis.
    pub domain: Option<Vec<[f64; 2]>>,
    pub tolerance: Option<f64>,
    pub estimator: Option<EstimatorConfig>,
    pub seminorm: Option<SeminormConfig>,
    pub scan: Option<ScanConfig>,
    pub scan_mode: Option<ScanMode>,
    pub spectral_grid: Option<SpectralGrid>,
    pub sharpness: Option<f64>,
    pub j_values: Option<Vec<i32>>,
    pub t_values: Option<Vec<f64>>,
    pub big_j: Option<Vec<u32>>,
}

#[derive(Debug)]
pub enum ConfigError {
    Read(PathBuf, std::io::Error),
    Parse(String),
    Invalid(Vec<String>),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Read(path, e) => write!(f, "cannot read {}: {e}", path.display()),
            ConfigError::Parse(msg) => write!(f, "config parse error: {msg}"),
            ConfigError::Invalid(problems) => {
                write!(f, "invalid config:")?;
                for p in problems {
                    write!(f, "\n  - {p}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }
}
