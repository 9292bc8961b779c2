//! Experiment configuration: environment + trainer + seeds + output layout.

use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::rl::TrainerConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub trainer: TrainerConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// CI scale: caps max_epochs at 30 and max_episode_steps at 500.
    #[serde(default)]
    pub desk_scale: bool,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.trainer.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        Ok(())
    }

    /// Resolve the desk-scale caps into the effective per-run settings.
    pub fn effective(&self) -> ExperimentConfig {
        let mut cfg = self.clone();
        if cfg.desk_scale {
            cfg.trainer.max_epochs = cfg.trainer.max_epochs.min(30);
            cfg.env.max_episode_steps = cfg.env.max_episode_steps.min(500);
        }
        cfg
    }

    /// Window of epochs used for end-of-run cost/reward summaries.
    pub fn final_window(&self) -> usize {
        if self.desk_scale {
            10
        } else {
            25
        }
    }
}
