use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agents::Algorithm;
use crate::confidence::RewardMode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Label used for output file names; defaults to the environment name.
    #[serde(default)]
    pub name: Option<String>,
    pub env: String,
    #[serde(default)]
    pub env_params: Value,
    pub horizon: u64,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_ratio")]
    pub checkpoint_ratio: f64,
    /// Additional checkpoints on top of the geometric grid and `horizon`.
    #[serde(default)]
    pub extra_checkpoints: Vec<u64>,
    #[serde(default)]
    pub reward_mode: RewardMode,
    /// Worker threads; `None` uses every available core.
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_delta() -> f64 {
    0.01
}

fn default_ratio() -> f64 {
    1.05
}

impl ExperimentConfig {
    pub fn new(env: &str, horizon: u64, algorithms: Vec<Algorithm>, replications: usize) -> Self {
        ExperimentConfig {
            name: None,
            env: env.to_string(),
            env_params: Value::Null,
            horizon,
            algorithms,
            delta: default_delta(),
            replications,
            base_seed: 0,
            checkpoint_ratio: default_ratio(),
            extra_checkpoints: Vec::new(),
            reward_mode: RewardMode::Max,
            workers: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.env)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Parameter("horizon must be at least 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::Parameter("at least one replication is required".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Parameter("at least one algorithm is required".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Parameter(format!("delta {} outside (0,1)", self.delta)));
        }
        if !(self.checkpoint_ratio > 1.0) {
            return Err(Error::Parameter("checkpoint ratio must exceed 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Parameter("worker count must be positive".into()));
        }
        Ok(())
    }

    /// Geometric grid `1, ceil(1.05), ...` plus the extra checkpoints and the horizon.
    pub fn checkpoints(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut t = 1u64;
        while t < self.horizon {
            out.push(t);
            t = ((t as f64 * self.checkpoint_ratio).ceil() as u64).max(t + 1);
        }
        out.push(self.horizon);
        out.extend(self.extra_checkpoints.iter().copied().filter(|&c| c >= 1 && c <= self.horizon));
        out.sort_unstable();
        out.dedup();
        out
    }
}
