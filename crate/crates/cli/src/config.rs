use std::path::Path;

use gdp_core::interaction::InteractionOptions;
use gdp_core::model::ModelParameters;
use gdp_core::oracle::{SimulationGrid, TestFunction, WeakForm};
use gdp_core::profile::ProfileOptions;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// One experiment: a model, the wave amplitudes, and per-stage options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParameters,
    /// Amplitudes, slow wave first for two-wave commands.
    pub waves: Vec<f64>,
    #[serde(default)]
    pub profile: ProfileOptions,
    #[serde(default)]
    pub scattering: ScatteringConfig,
    #[serde(default)]
    pub interaction: InteractionOptions,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub residual: ResidualConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Where and when the wave trajectories cross.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatteringConfig {
    pub t_star: f64,
    pub x_star: f64,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        Self { t_star: 1.5, x_star: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub grid: SimulationGrid,
    pub snapshot_every: usize,
    pub monitor_every: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { grid: SimulationGrid::default(), snapshot_every: 500, monitor_every: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResidualConfig {
    /// Coarse dispersion; the fine run uses half of it.
    pub epsilon: f64,
    /// Use every `stride`-th trajectory node.
    pub stride: usize,
    pub form: WeakForm,
    /// Defaults to three bumps around the crossing point.
    pub tests: Option<Vec<TestFunction>>,
}

impl Default for ResidualConfig {
    fn default() -> Self {
        Self { epsilon: 0.1, stride: 4, form: WeakForm::Asymptotic, tests: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Write one `x,u` CSV per simulation snapshot.
    pub snapshots: bool,
    /// Reuse and store integrated profiles under `cache/`.
    pub cache: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { snapshots: false, cache: true }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        let mut problems = Vec::new();
        if self.waves.is_empty() {
            problems.push("waves must list at least one amplitude".to_string());
        }
        if self.oracle.snapshot_every == 0 || self.oracle.monitor_every == 0 {
            problems.push("oracle.snapshot_every and oracle.monitor_every must be >= 1".into());
        }
        let eps = self.residual.epsilon;
        if eps.is_nan() || eps <= 0.0 || self.residual.stride == 0 {
            problems.push("residual.epsilon must be > 0 and residual.stride >= 1".into());
        }
        let step = self.interaction.step;
        if step.is_nan() || step <= 0.0 {
            problems.push(format!("interaction.step must be > 0 (got {})", self.interaction.step));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(problems.join("; ")))
        }
    }

    /// Hex SHA-256 of the canonical serialisation.
    pub fn hash(&self) -> String {
        hex_digest(serde_json::to_string(self).expect("config serialises").as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
