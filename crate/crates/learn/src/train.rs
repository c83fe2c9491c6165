//! The training loop: collect rollouts, run clipped PPO epochs, update the
//! observation normalizer and advance the reward stage.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use myowalk_core::dynamics::Model;
use myowalk_core::env::{build_env, Environment, Status};
use myowalk_core::model::resolve_model;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checkpoint::{Checkpoint, FORMAT_VERSION};
use crate::config::TrainConfig;
use crate::metrics::{IterationMetrics, MetricsWriter};
use crate::optim::{clip_grad_norm, Adam, RunningNorm};
use crate::policy::ActorCritic;
use crate::ppo::{normalize_advantages, ppo_loss, Batch, Grads};
use crate::rollout::{collect_rollouts, EpisodeSummary, Rollout, Snapshot};
use crate::stage::StageController;
use crate::LearnError;

/// RNG stream used for parameter initialization; rollout streams use
/// `(iteration << 16) | worker` and never reach it.
const INIT_STREAM: u64 = u64::MAX;
/// Worker slot reserved for minibatch shuffling.
const SHUFFLE_WORKER: u64 = 0xFFFF;

pub struct Trainer {
    pub cfg: TrainConfig,
    hash: String,
    model: Arc<Model>,
    envs: Vec<Box<dyn Environment>>,
    pub policy: ActorCritic,
    opt_pi: Adam,
    opt_v: Adam,
    pub norm: RunningNorm,
    pub stage: StageController,
    /// Completed iterations.
    pub iteration: u64,
    threads: usize,
}

#[derive(Debug, Default)]
struct UpdateStats {
    policy_loss: f64,
    value_loss: f64,
    entropy: f64,
    approx_kl: f64,
    clip_frac: f64,
    rejected: bool,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn load_model(cfg: &TrainConfig) -> Result<Arc<Model>, LearnError> {
    Ok(Arc::new(Model::new(resolve_model(&cfg.model)?)?))
}

fn build_envs(model: &Arc<Model>, cfg: &TrainConfig) -> Result<Vec<Box<dyn Environment>>, LearnError> {
    (0..cfg.run.workers)
        .map(|_| build_env(model.clone(), &cfg.env).map_err(LearnError::from))
        .collect()
}

impl Trainer {
    pub fn new(cfg: TrainConfig) -> Result<Self, LearnError> {
        cfg.validate()?;
        let model = load_model(&cfg)?;
        let envs = build_envs(&model, &cfg)?;
        let (obs_dim, act_dim) = (envs[0].obs_dim(), envs[0].action_dim());
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
        rng.set_stream(INIT_STREAM);
        let policy = ActorCritic::new(obs_dim, act_dim, &cfg.ppo.hidden, cfg.ppo.init_log_std, &mut rng);
        let opt_pi = Adam::new(policy.pi.params.len() + act_dim, cfg.ppo.lr);
        let opt_v = Adam::new(policy.v.params.len(), cfg.ppo.lr);
        Ok(Self {
            hash: cfg.hash(),
            stage: StageController::new(cfg.stage.clone(), cfg.run.iterations),
            norm: RunningNorm::new(obs_dim),
            threads: default_threads(cfg.run.workers),
            cfg,
            model,
            envs,
            policy,
            opt_pi,
            opt_v,
            iteration: 0,
        })
    }

    /// Restores a run. `cfg` is the config the caller intends to continue
    /// with; it must hash identically to the one the checkpoint was written
    /// under.
    pub fn from_checkpoint(ck: Checkpoint, cfg: &TrainConfig) -> Result<Self, LearnError> {
        let current = cfg.hash();
        if current != ck.config_hash {
            return Err(LearnError::HashMismatch {
                checkpoint: ck.config_hash,
                current,
            });
        }
        cfg.validate()?;
        let model = load_model(cfg)?;
        let envs = build_envs(&model, cfg)?;
        ck.check_dims(envs[0].obs_dim(), envs[0].action_dim())?;
        Ok(Self {
            hash: current,
            threads: default_threads(cfg.run.workers),
            cfg: cfg.clone(),
            model,
            envs,
            policy: ck.policy,
            opt_pi: ck.opt_pi,
            opt_v: ck.opt_v,
            norm: ck.norm,
            stage: ck.stage,
            iteration: ck.iteration,
        })
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    /// Caps the number of threads used for rollouts. Results do not depend
    /// on it.
    pub fn set_threads(&mut self, threads: usize) {
        self.threads = threads.max(1);
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: FORMAT_VERSION,
            config_hash: self.hash.clone(),
            config: self.cfg.clone(),
            iteration: self.iteration,
            stage: self.stage.clone(),
            policy: self.policy.clone(),
            opt_pi: self.opt_pi.clone(),
            opt_v: self.opt_v.clone(),
            norm: self.norm.clone(),
            obs_dim: self.policy.obs_dim(),
            act_dim: self.policy.act_dim(),
        }
    }

    /// Runs one iteration and returns its metrics.
    pub fn iterate(&mut self) -> Result<IterationMetrics, LearnError> {
        let start = Instant::now();
        let it = self.iteration + 1;
        let stage = self.stage.stage;
        for env in &mut self.envs {
            env.set_stage(stage);
        }
        let ppo = &self.cfg.ppo;
        let snap = Snapshot {
            policy: &self.policy,
            norm: &self.norm,
            normalize_obs: ppo.normalize_obs,
            gamma: ppo.gamma,
            lambda: ppo.lambda,
        };
        let roll = collect_rollouts(
            &mut self.envs,
            &snap,
            ppo.steps_per_iteration,
            self.cfg.run.seed,
            it,
            self.threads,
        )?;
        let stats = self.update(&roll.batch, it);
        if self.cfg.ppo.normalize_obs && !stats.rejected {
            self.norm.update(&roll.raw_obs);
        }
        let metrics = summarize(it, stage.number(), &roll, &stats, start);
        let mean_return = (metrics.episodes > 0).then_some(metrics.mean_return);
        self.stage.update(it, mean_return);
        self.iteration = it;
        Ok(metrics)
    }

    fn update(&mut self, batch: &Batch, it: u64) -> UpdateStats {
        let n = batch.len();
        if n == 0 {
            return UpdateStats {
                policy_loss: f64::NAN,
                value_loss: f64::NAN,
                entropy: self.policy.entropy(),
                approx_kl: f64::NAN,
                clip_frac: f64::NAN,
                rejected: false,
            };
        }
        let backup = (self.policy.clone(), self.opt_pi.clone(), self.opt_v.clone());
        let ppo = self.cfg.ppo.clone();
        let mut rng = crate::rollout::worker_rng(self.cfg.run.seed, it, SHUFFLE_WORKER);
        let n_mb = ((n as f64 / ppo.minibatch as f64).round() as usize).max(1);
        let mb_len = n.div_ceil(n_mb);
        let mut idx: Vec<usize> = (0..n).collect();
        let mut stats = UpdateStats::default();
        let mut count = 0.0;
        let n_pi = self.policy.pi.params.len();
        for _ in 0..ppo.epochs {
            idx.shuffle(&mut rng);
            for chunk in idx.chunks(mb_len) {
                let mut mb = batch.select(chunk);
                normalize_advantages(&mut mb.adv);
                let out = ppo_loss(&self.policy, &mb, &ppo);
                let Grads { pi, log_std, mut v } = out.grads;
                let mut g_pi = pi;
                g_pi.extend(log_std);
                let finite = out.loss.is_finite() && g_pi.iter().chain(&v).all(|g| g.is_finite());
                if !finite {
                    log::warn!("iteration {it}: non-finite PPO loss, update rejected");
                    (self.policy, self.opt_pi, self.opt_v) = backup;
                    stats.rejected = true;
                    return stats;
                }
                clip_grad_norm(&mut [&mut g_pi], ppo.max_grad_norm);
                clip_grad_norm(&mut [&mut v], ppo.max_grad_norm);
                let mut p: Vec<f64> = self.policy.pi.params.iter().chain(&self.policy.log_std).copied().collect();
                self.opt_pi.step(&mut p, &g_pi);
                self.policy.log_std.copy_from_slice(&p[n_pi..]);
                p.truncate(n_pi);
                self.policy.pi.params = p;
                self.opt_v.step(&mut self.policy.v.params, &v);
                self.policy.clamp_log_std();
                stats.policy_loss += out.policy_loss;
                stats.value_loss += out.value_loss;
                stats.entropy += out.entropy;
                stats.approx_kl += out.approx_kl;
                stats.clip_frac += out.clip_frac;
                count += 1.0;
            }
        }
        if !self.policy.is_finite() {
            log::warn!("iteration {it}: non-finite parameters after update, rejected");
            (self.policy, self.opt_pi, self.opt_v) = backup;
            stats.rejected = true;
            return stats;
        }
        stats.policy_loss /= count;
        stats.value_loss /= count;
        stats.entropy /= count;
        stats.approx_kl /= count;
        stats.clip_frac /= count;
        stats
    }

    /// Trains until `cfg.run.iterations`, writing `config.json`,
    /// `metrics.csv` and `checkpoints/` under `out_dir`. A trainer restored
    /// from a checkpoint appends to the existing metrics.
    pub fn run(&mut self, out_dir: &Path, mut on_iteration: impl FnMut(&IterationMetrics)) -> Result<(), LearnError> {
        let ck_dir = out_dir.join("checkpoints");
        std::fs::create_dir_all(&ck_dir).map_err(|e| LearnError::io(&ck_dir, e))?;
        let cfg_path = out_dir.join("config.json");
        std::fs::write(&cfg_path, self.cfg.to_json()).map_err(|e| LearnError::io(&cfg_path, e))?;
        let metrics_path = out_dir.join("metrics.csv");
        let mut writer = if self.iteration == 0 {
            MetricsWriter::create(&metrics_path)?
        } else {
            MetricsWriter::resume(&metrics_path, self.iteration)?
        };
        let every = self.cfg.run.checkpoint_every;
        while self.iteration < self.cfg.run.iterations {
            let m = self.iterate()?;
            writer.write(&m)?;
            on_iteration(&m);
            let ck = self.checkpoint();
            if self.stage.switch_iteration == Some(self.iteration + 1) {
                ck.save(&ck_dir.join("stage_switch.json"))?;
            }
            if every > 0 && self.iteration % every == 0 {
                ck.save(&ck_dir.join(format!("iter_{:06}.json", self.iteration)))?;
            }
            ck.save(&ck_dir.join("latest.json"))?;
        }
        Ok(())
    }
}

/// Threads used when nothing else is requested: one per worker up to the
/// machine's parallelism.
pub fn default_threads(workers: usize) -> usize {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    workers.clamp(1, cores)
}

fn summarize(it: u64, stage: u8, roll: &Rollout, stats: &UpdateStats, start: Instant) -> IterationMetrics {
    let eps: &[EpisodeSummary] = &roll.episodes;
    IterationMetrics {
        iteration: it,
        stage,
        episodes: eps.len(),
        mean_return: mean(eps.iter().map(|e| e.ret)),
        max_return: eps.iter().map(|e| e.ret).reduce(f64::max).unwrap_or(f64::NAN),
        mean_length: mean(eps.iter().map(|e| e.length as f64)),
        mean_distance: mean(eps.iter().map(|e| e.distance)),
        mean_met: mean(eps.iter().map(|e| e.met_mean)),
        mean_cot: mean(eps.iter().filter_map(|e| e.cot)),
        fell_frac: mean(eps.iter().map(|e| f64::from(u8::from(e.status == Status::Fell)))),
        policy_loss: stats.policy_loss,
        value_loss: stats.value_loss,
        entropy: stats.entropy,
        approx_kl: stats.approx_kl,
        clip_frac: stats.clip_frac,
        aborted: roll.aborted,
        steps: roll.batch.len(),
        rejected: stats.rejected,
        wall_clock_s: start.elapsed().as_secs_f64(),
    }
}
