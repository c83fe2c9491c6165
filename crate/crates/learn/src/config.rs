//! The training config file: environment, PPO, stage and run sections in the
//! same JSON grammar as model files. Its SHA-256 over the canonical
//! serialization guards checkpoint resumption.

use std::path::Path;

use myowalk_core::env::EnvConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ppo::PpoConfig;
use crate::stage::StageConfig;
use crate::LearnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub iterations: u64,
    pub seed: u64,
    /// Logical rollout workers. Each has its own environment and RNG stream;
    /// the thread count only changes how they are scheduled.
    pub workers: usize,
    /// Checkpoint period in iterations (0 disables periodic checkpoints).
    pub checkpoint_every: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            seed: 0,
            workers: 8,
            checkpoint_every: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Bundled model name or path to a model file.
    pub model: String,
    /// Name of the preset this config was derived from, for the record.
    pub preset: Option<String>,
    pub env: EnvConfig,
    pub ppo: PpoConfig,
    pub stage: StageConfig,
    pub run: RunConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: "biped2d".into(),
            preset: None,
            env: EnvConfig::default(),
            ppo: PpoConfig::default(),
            stage: StageConfig::default(),
            run: RunConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, LearnError> {
        let text = std::fs::read_to_string(path).map_err(|e| LearnError::io(path, e))?;
        Self::from_json(&text).map_err(|e| LearnError::json(path, e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the compact serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        self.ppo.validate().map_err(LearnError::Config)?;
        self.stage.validate().map_err(LearnError::Config)?;
        self.env.reward.validate().map_err(LearnError::Config)?;
        if self.run.workers == 0 {
            return Err(LearnError::Config("run.workers must be ≥ 1".into()));
        }
        if self.run.workers >= 0xFFFF {
            return Err(LearnError::Config("run.workers must be < 65535".into()));
        }
        Ok(())
    }
}
