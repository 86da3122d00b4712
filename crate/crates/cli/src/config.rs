//! Run configuration: TOML or JSON by file extension, every key optional.

use hexaspec_core::perturbation::EPSILON_MAX;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    pub lambda: LambdaConfig,
    pub theta: ThetaConfig,
    pub perturbation: PerturbationSection,
    pub tolerances: ToleranceConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    /// Cosine coefficients a_k of q(x) = Σ a_k cos(2πkx); empty = free.
    pub cosine: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaConfig {
    pub min: f64,
    pub max: f64,
    pub grid: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaConfig {
    /// Points per axis over [−π, π], endpoints included.
    pub grid: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSection {
    pub epsilon: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub integrator: f64,
    pub root: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Empty: derive "<command>.<ext>" in the working directory.
    pub path: String,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self { cosine: Vec::new() }
    }
}

impl Default for LambdaConfig {
    fn default() -> Self {
        Self { min: -50.0, max: 1000.0, grid: 2000 }
    }
}

impl Default for ThetaConfig {
    fn default() -> Self {
        Self { grid: 181 }
    }
}

impl Default for PerturbationSection {
    fn default() -> Self {
        Self { epsilon: 0.0, c1: 0.0 }
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { integrator: 1e-10, root: 1e-10 }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { path: String::new(), format: OutputFormat::Csv }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: Default::default(),
            lambda: Default::default(),
            theta: Default::default(),
            perturbation: Default::default(),
            tolerances: Default::default(),
            output: Default::default(),
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(String),
    Invalid { key: &'static str, reason: String },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(e) => write!(f, "cannot parse config: {e}"),
            ConfigError::Invalid { key, reason } => write!(f, "invalid config value `{key}`: {reason}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    /// Load and validate a TOML (`.toml`) or JSON (anything else) config.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        let is_toml = path.extension().map(|e| e == "toml").unwrap_or(false);
        let config: RunConfig = if is_toml {
            toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |key: &'static str, reason: String| Err(ConfigError::Invalid { key, reason });
        for (i, a) in self.potential.cosine.iter().enumerate() {
            if !a.is_finite() {
                return fail("potential.cosine", format!("non-finite coefficient at index {i}"));
            }
        }
        if !(self.lambda.max > self.lambda.min) {
            return fail("lambda.max", format!("window [{}, {}] empty", self.lambda.min, self.lambda.max));
        }
        if self.lambda.grid < 2 {
            return fail("lambda.grid", format!("must be >= 2, got {}", self.lambda.grid));
        }
        if self.theta.grid < 2 {
            return fail("theta.grid", format!("must be >= 2, got {}", self.theta.grid));
        }
        if !(self.tolerances.integrator > 0.0) {
            return fail("tolerances.integrator", format!("must be > 0, got {}", self.tolerances.integrator));
        }
        if !(self.tolerances.root > 0.0) {
            return fail("tolerances.root", format!("must be > 0, got {}", self.tolerances.root));
        }
        if !(-1.0..=1.0).contains(&self.perturbation.c1) {
            return fail("perturbation.c1", format!("must lie in [-1, 1], got {}", self.perturbation.c1));
        }
        if !(self.perturbation.epsilon.abs() < EPSILON_MAX) {
            return fail(
                "perturbation.epsilon",
                format!("|epsilon| must be < pi/6, got {}", self.perturbation.epsilon),
            );
        }
        Ok(())
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
