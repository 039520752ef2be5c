//! Run configuration, read from TOML.

use crate::amplitude::SolverConfig;
use crate::correlation::{DiscordOptions, InitialWeights, Partition};
use crate::error::{Error, Result};
use crate::reservoir::{EmitterParams, ReservoirParams};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// One run: emitter, bath, solver, initial state, requested outputs.
///
/// Every section except `[emitter]` has defaults; unknown keys are rejected.
///
/// ```toml
/// [emitter]
/// omega_0 = 0.1
///
/// [reservoir]
/// eta = 0.2
///
/// [solver]
/// dt = 0.01
/// t_max = 50.0
///
/// [initial]
/// alpha = 0.7071067811865476
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub emitter: EmitterSection,
    #[serde(default)]
    pub reservoir: ReservoirParams,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default = "default_partitions")]
    pub partitions: Vec<Partition>,
    #[serde(default)]
    pub discord: DiscordOptions,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSection {
    pub omega_0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub alpha: f64,
    /// Defaults to √(1 − α²).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            alpha: std::f64::consts::FRAC_1_SQRT_2,
            beta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Keep every `stride`-th time point in written series.
    pub stride: usize,
    /// Also run the discrete-mode oracle with this many modes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_modes: Option<usize>,
    /// Write SVG plots next to the CSV files.
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            stride: 10,
            oracle_modes: None,
            plots: true,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_partitions() -> Vec<Partition> {
    vec![Partition::N1N2]
}

impl RunConfig {
    /// Defaults around a given ω₀.
    pub fn for_emitter(omega_0: f64) -> Self {
        Self {
            preset: None,
            output_dir: default_output_dir(),
            emitter: EmitterSection { omega_0 },
            reservoir: ReservoirParams::default(),
            solver: SolverConfig::default(),
            initial: InitialSection::default(),
            partitions: default_partitions(),
            discord: DiscordOptions::default(),
            output: OutputSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical TOML of the fully resolved configuration.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.reservoir.validate()?;
        self.solver.validate()?;
        self.emitter_params()?;
        self.weights()?;
        if self.partitions.is_empty() {
            return Err(Error::Config("at least one partition is required".into()));
        }
        if self.output.stride == 0 {
            return Err(Error::param("stride", "must be at least 1"));
        }
        if self.discord.grid < 2 {
            return Err(Error::param("discord.grid", "need at least 2 points per angle"));
        }
        if !(self.discord.tolerance > 0.0) {
            return Err(Error::param("discord.tolerance", "must be positive"));
        }
        if self.output.oracle_modes == Some(0) {
            return Err(Error::param("oracle_modes", "need at least one mode"));
        }
        Ok(())
    }

    pub fn emitter_params(&self) -> Result<EmitterParams> {
        EmitterParams::new(self.emitter.omega_0, &self.reservoir)
    }

    pub fn weights(&self) -> Result<InitialWeights> {
        let alpha = self.initial.alpha;
        match self.initial.beta {
            None => InitialWeights::from_alpha(alpha),
            Some(beta) => InitialWeights::new(alpha.into(), beta.into()),
        }
    }
}
