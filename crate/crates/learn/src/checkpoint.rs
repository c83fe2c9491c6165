//! Versioned JSON checkpoints. Floats round-trip exactly, so a resumed run
//! continues bit for bit. Rollout and shuffling RNG streams are derived from
//! (seed, iteration), so no generator state needs saving.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::TrainConfig;
use crate::optim::{Adam, RunningNorm};
use crate::policy::ActorCritic;
use crate::stage::StageController;
use crate::LearnError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: u32,
    pub config_hash: String,
    pub config: TrainConfig,
    /// Completed iterations.
    pub iteration: u64,
    pub stage: StageController,
    pub policy: ActorCritic,
    /// Optimizer over the mean network followed by the log-std vector.
    pub opt_pi: Adam,
    pub opt_v: Adam,
    pub norm: RunningNorm,
    pub obs_dim: usize,
    pub act_dim: usize,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<(), LearnError> {
        let text = serde_json::to_string(self).map_err(|e| LearnError::json(path, e))?;
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, text).map_err(|e| LearnError::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| LearnError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, LearnError> {
        let text = std::fs::read_to_string(path).map_err(|e| LearnError::io(path, e))?;
        let ck: Checkpoint = serde_json::from_str(&text).map_err(|e| LearnError::json(path, e))?;
        if ck.format != FORMAT_VERSION {
            return Err(LearnError::Format {
                found: ck.format,
                supported: FORMAT_VERSION,
            });
        }
        Ok(ck)
    }

    /// Fails unless the checkpoint's observation and action sizes match.
    pub fn check_dims(&self, obs_dim: usize, act_dim: usize) -> Result<(), LearnError> {
        if self.obs_dim != obs_dim || self.act_dim != act_dim {
            return Err(LearnError::DimMismatch {
                ckpt_obs: self.obs_dim,
                ckpt_act: self.act_dim,
                model_obs: obs_dim,
                model_act: act_dim,
            });
        }
        Ok(())
    }
}
