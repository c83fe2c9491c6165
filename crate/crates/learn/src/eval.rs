//! Policy evaluation over a fixed number of episodes.

use myowalk_core::env::{Environment, Transition};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::optim::RunningNorm;
use crate::policy::ActorCritic;
use crate::rollout::{run_episode, EpisodeSummary, Snapshot};
use crate::LearnError;

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub episodes: usize,
    pub seed: u64,
    /// Use the mean action instead of sampling.
    pub deterministic: bool,
    pub normalize_obs: bool,
}

/// Runs `opts.episodes` episodes. `on_step` sees the episode index, the
/// environment after each step and the transition. Aborted episodes are
/// reported, not skipped.
pub fn evaluate(
    env: &mut dyn Environment,
    policy: &ActorCritic,
    norm: &RunningNorm,
    opts: EvalOptions,
    mut on_step: impl FnMut(usize, &dyn Environment, &Transition),
) -> Result<Vec<EpisodeSummary>, LearnError> {
    if policy.obs_dim() != env.obs_dim() || policy.act_dim() != env.action_dim() {
        return Err(LearnError::DimMismatch {
            ckpt_obs: policy.obs_dim(),
            ckpt_act: policy.act_dim(),
            model_obs: env.obs_dim(),
            model_act: env.action_dim(),
        });
    }
    let snap = Snapshot {
        policy,
        norm,
        normalize_obs: opts.normalize_obs,
        gamma: 1.0,
        lambda: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::with_capacity(opts.episodes);
    for ep in 0..opts.episodes {
        let (mut ret, mut length) = (0.0, 0);
        let last = run_episode(env, &snap, opts.deterministic, &mut rng, |env, tr| {
            ret += tr.reward;
            length += 1;
            on_step(ep, env, tr);
        })?;
        out.push(EpisodeSummary {
            worker: ep,
            ret,
            length,
            distance: last.info.distance,
            met_mean: last.info.met_mean,
            e_total: last.info.e_total,
            cot: last.info.cot,
            status: last.status,
        });
    }
    Ok(out)
}
