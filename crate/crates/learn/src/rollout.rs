//! Episode collection. Each worker owns an environment and an RNG stream
//! derived from (seed, iteration, worker), so results do not depend on how
//! workers are scheduled onto threads.

use std::thread;

use myowalk_core::env::{Environment, Status, Transition};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::optim::RunningNorm;
use crate::policy::ActorCritic;
use crate::ppo::{gae, Batch};
use crate::LearnError;

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub worker: usize,
    pub ret: f64,
    pub length: usize,
    pub distance: f64,
    pub met_mean: f64,
    pub e_total: f64,
    pub cot: Option<f64>,
    pub status: Status,
}

/// What a worker needs from the learner: the policy and the frozen
/// observation normalizer.
#[derive(Clone, Copy)]
pub struct Snapshot<'a> {
    pub policy: &'a ActorCritic,
    pub norm: &'a RunningNorm,
    pub normalize_obs: bool,
    pub gamma: f64,
    pub lambda: f64,
}

impl Snapshot<'_> {
    pub fn prepare(&self, obs: &[f64]) -> Vec<f64> {
        if self.normalize_obs {
            self.norm.normalize(obs)
        } else {
            obs.to_vec()
        }
    }
}

#[derive(Debug, Default)]
pub struct Rollout {
    pub batch: Batch,
    /// Unnormalized observations of the kept samples, for the normalizer.
    pub raw_obs: Vec<Vec<f64>>,
    pub episodes: Vec<EpisodeSummary>,
    /// Episodes discarded because the simulation aborted.
    pub aborted: usize,
}

#[derive(Default)]
struct WorkerOut {
    obs: Vec<f64>,
    u: Vec<f64>,
    logp: Vec<f64>,
    adv: Vec<f64>,
    ret: Vec<f64>,
    raw: Vec<Vec<f64>>,
    episodes: Vec<EpisodeSummary>,
    aborted: usize,
}

pub fn worker_rng(seed: u64, iteration: u64, worker: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((iteration << 16) | worker);
    rng
}

/// Runs one episode to termination, feeding every transition to `on_step`.
pub fn run_episode(
    env: &mut dyn Environment,
    snap: &Snapshot,
    deterministic: bool,
    rng: &mut ChaCha8Rng,
    mut on_step: impl FnMut(&dyn Environment, &Transition),
) -> Result<Transition, LearnError> {
    let mut obs = env.reset(rng);
    loop {
        let x = snap.prepare(&obs);
        let s = snap.policy.act(&x, deterministic, rng);
        let tr = env.step(&s.a)?;
        on_step(&*env, &tr);
        if tr.status.is_terminal() {
            return Ok(tr);
        }
        obs = tr.obs;
    }
}

fn run_worker(env: &mut dyn Environment, snap: &Snapshot, quota: usize, worker: usize, mut rng: ChaCha8Rng) -> Result<WorkerOut, LearnError> {
    let mut out = WorkerOut::default();
    let mut kept = 0;
    while kept < quota {
        let mut raw = Vec::new();
        let mut xs: Vec<f64> = Vec::new();
        let mut us = Vec::new();
        let mut logps = Vec::new();
        let mut rewards = Vec::new();
        let mut obs = env.reset(&mut rng);
        let last = loop {
            let x = snap.prepare(&obs);
            let s = snap.policy.act(&x, false, &mut rng);
            let tr = env.step(&s.a)?;
            raw.push(obs);
            xs.extend_from_slice(&x);
            us.extend_from_slice(&s.u);
            logps.push(s.logp);
            rewards.push(tr.reward);
            if tr.status.is_terminal() {
                break tr;
            }
            obs = tr.obs;
        };
        if last.status == Status::Aborted {
            out.aborted += 1;
            continue;
        }
        let t_len = rewards.len();
        let obs_dim = snap.policy.obs_dim();
        let xm = Array2::from_shape_vec((t_len, obs_dim), xs).expect("rows of obs_dim");
        let mut values = snap.policy.values(xm.view());
        let bootstrap = if last.status == Status::Timeout {
            let x = snap.prepare(&last.obs);
            snap.policy.values(crate::nn::row_view(&x))[0]
        } else {
            0.0
        };
        values.push(bootstrap);
        let mut dones = vec![false; t_len];
        dones[t_len - 1] = last.status == Status::Fell;
        let (adv, ret) = gae(&rewards, &values, &dones, snap.gamma, snap.lambda)?;
        out.episodes.push(EpisodeSummary {
            worker,
            ret: rewards.iter().sum(),
            length: t_len,
            distance: last.info.distance,
            met_mean: last.info.met_mean,
            e_total: last.info.e_total,
            cot: last.info.cot,
            status: last.status,
        });
        out.obs.extend(xm.into_raw_vec_and_offset().0);
        out.u.extend(us);
        out.logp.extend(logps);
        out.adv.extend(adv);
        out.ret.extend(ret);
        out.raw.extend(raw);
        kept += t_len;
    }
    Ok(out)
}

/// Collects at least `steps` transitions split evenly over the workers
/// (one per environment), running on up to `threads` threads. Output order is
/// by worker, then episode.
pub fn collect_rollouts(
    envs: &mut [Box<dyn Environment>],
    snap: &Snapshot,
    steps: usize,
    seed: u64,
    iteration: u64,
    threads: usize,
) -> Result<Rollout, LearnError> {
    let n = envs.len();
    if n == 0 {
        return Err(LearnError::Config("at least one rollout worker is required".into()));
    }
    let quota = steps.div_ceil(n);
    let per_thread = n.div_ceil(threads.clamp(1, n));
    let outs: Vec<Result<WorkerOut, LearnError>> = if per_thread >= n {
        envs.iter_mut()
            .enumerate()
            .map(|(w, env)| run_worker(env.as_mut(), snap, quota, w, worker_rng(seed, iteration, w as u64)))
            .collect()
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = envs
                .chunks_mut(per_thread)
                .enumerate()
                .map(|(c, chunk)| {
                    scope.spawn(move || {
                        chunk
                            .iter_mut()
                            .enumerate()
                            .map(|(i, env)| {
                                let w = c * per_thread + i;
                                run_worker(env.as_mut(), snap, quota, w, worker_rng(seed, iteration, w as u64))
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("rollout worker panicked")).collect()
        })
    };

    let obs_dim = snap.policy.obs_dim();
    let act_dim = snap.policy.act_dim();
    let mut r = Rollout::default();
    let (mut obs, mut u) = (Vec::new(), Vec::new());
    for o in outs {
        let o = o?;
        obs.extend(o.obs);
        u.extend(o.u);
        r.batch.logp.extend(o.logp);
        r.batch.adv.extend(o.adv);
        r.batch.ret.extend(o.ret);
        r.raw_obs.extend(o.raw);
        r.episodes.extend(o.episodes);
        r.aborted += o.aborted;
    }
    let len = r.batch.logp.len();
    r.batch.obs = Array2::from_shape_vec((len, obs_dim), obs).expect("obs rows");
    r.batch.u = Array2::from_shape_vec((len, act_dim), u).expect("action rows");
    Ok(r)
}
