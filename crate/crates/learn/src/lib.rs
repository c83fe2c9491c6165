//! PPO training for myowalk environments.
//!
//! - [`nn`], [`policy`], [`optim`]: networks, the squashed-Gaussian actor-critic and Adam
//! - [`ppo`]: advantage estimation and the clipped objective
//! - [`rollout`]: deterministic multi-worker episode collection
//! - [`stage`]: the dense→sparse energy-reward schedule
//! - [`config`], [`checkpoint`], [`metrics`], [`train`], [`eval`]: run plumbing

use std::path::PathBuf;

use myowalk_core::env::EnvError;
use myowalk_core::model::ModelError;
use thiserror::Error;

pub mod checkpoint;
pub mod config;
pub mod eval;
pub mod metrics;
pub mod nn;
pub mod optim;
pub mod policy;
pub mod ppo;
pub mod rollout;
pub mod stage;
pub mod train;

pub use checkpoint::Checkpoint;
pub use config::{RunConfig, TrainConfig};
pub use ppo::PpoConfig;
pub use stage::{StageConfig, StageController};
pub use train::Trainer;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("config hash mismatch: checkpoint was written with {checkpoint}, current config hashes to {current}; refusing to resume")]
    HashMismatch { checkpoint: String, current: String },
    #[error("dimension mismatch: checkpoint has obs {ckpt_obs} / action {ckpt_act}, model gives obs {model_obs} / action {model_act}")]
    DimMismatch {
        ckpt_obs: usize,
        ckpt_act: usize,
        model_obs: usize,
        model_act: usize,
    },
    #[error("unsupported checkpoint format {found} (this build reads {supported})")]
    Format { found: u32, supported: u32 },
}

impl LearnError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LearnError::Io { path: path.into(), source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        LearnError::Json { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        LearnError::Csv { path: path.into(), source }
    }
}
