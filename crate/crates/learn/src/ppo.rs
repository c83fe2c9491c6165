//! Generalized advantage estimation and the clipped PPO objective with
//! analytic gradients.

use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::policy::ActorCritic;
use crate::LearnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub gamma: f64,
    pub lambda: f64,
    pub clip_eps: f64,
    pub lr: f64,
    pub epochs: usize,
    pub minibatch: usize,
    /// Environment steps per iteration, summed over workers.
    pub steps_per_iteration: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Gradient-norm cap applied to the policy and value parameters separately.
    pub max_grad_norm: f64,
    pub normalize_obs: bool,
    pub hidden: Vec<usize>,
    pub init_log_std: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lambda: 0.95,
            clip_eps: 0.2,
            lr: 3e-4,
            epochs: 4,
            minibatch: 4096,
            steps_per_iteration: 65536,
            entropy_coef: 0.0,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            normalize_obs: true,
            hidden: vec![256, 256],
            init_log_std: -1.0,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(format!("ppo.gamma must be in (0, 1], got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(format!("ppo.lambda must be in [0, 1], got {}", self.lambda));
        }
        if !(self.clip_eps > 0.0) {
            return Err(format!("ppo.clip_eps must be > 0, got {}", self.clip_eps));
        }
        if !(self.lr > 0.0) || self.minibatch == 0 || self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err("ppo.lr must be > 0, ppo.minibatch ≥ 1 and ppo.hidden non-empty with positive widths".into());
        }
        Ok(())
    }
}

/// Advantages and returns. `values` has one more entry than `rewards`: the
/// bootstrap value after the last step. `dones[t]` cuts the bootstrap after
/// step `t`.
pub fn gae(rewards: &[f64], values: &[f64], dones: &[bool], gamma: f64, lambda: f64) -> Result<(Vec<f64>, Vec<f64>), LearnError> {
    let t_len = rewards.len();
    if values.len() != t_len + 1 || dones.len() != t_len {
        return Err(LearnError::Shape(format!(
            "gae: {} rewards need {} values and {} done flags, got {} and {}",
            t_len,
            t_len + 1,
            t_len,
            values.len(),
            dones.len()
        )));
    }
    let mut adv = vec![0.0; t_len];
    let mut next = 0.0;
    for t in (0..t_len).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * values[t + 1] * live - values[t];
        next = delta + gamma * lambda * live * next;
        adv[t] = next;
    }
    let ret = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, ret))
}

/// Shifts and scales to zero mean and unit (population) standard deviation.
/// Batches of one sample are only centred.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    for a in adv.iter_mut() {
        *a -= mean;
        if n > 1.0 && std > 1e-12 {
            *a /= std;
        }
    }
}

/// Training samples. `obs` rows are already normalized; `u` holds the
/// pre-squash actions that were sampled.
#[derive(Debug, Clone, Default)]
pub struct Batch {
    pub obs: Array2<f64>,
    pub u: Array2<f64>,
    pub logp: Vec<f64>,
    pub adv: Vec<f64>,
    pub ret: Vec<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.logp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logp.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Batch {
        Batch {
            obs: crate::nn::rows(&self.obs, idx),
            u: crate::nn::rows(&self.u, idx),
            logp: idx.iter().map(|&i| self.logp[i]).collect(),
            adv: idx.iter().map(|&i| self.adv[i]).collect(),
            ret: idx.iter().map(|&i| self.ret[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Grads {
    pub pi: Vec<f64>,
    pub log_std: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossOut {
    pub loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    /// Mean of `logp_old − logp`.
    pub approx_kl: f64,
    /// Fraction of samples whose ratio left `[1−ε, 1+ε]`.
    pub clip_frac: f64,
    /// Per-sample policy loss contributions `−min(ρA, clip(ρ)A)`.
    pub per_sample: Vec<f64>,
    pub ratios: Vec<f64>,
    pub grads: Grads,
}

/// Clipped surrogate loss plus value regression and entropy bonus:
/// `L = −mean(min(ρA, clip(ρ,1−ε,1+ε)A)) + c_v·mean((V−R)²) − c_e·H`.
///
/// Advantages are used as given; normalize them beforehand.
pub fn ppo_loss(ac: &ActorCritic, batch: &Batch, cfg: &PpoConfig) -> LossOut {
    let n = batch.len();
    let nf = n.max(1) as f64;
    let act = ac.act_dim();
    let pi = ac.pi.forward(batch.obs.view());
    let vt = ac.v.forward(batch.obs.view());
    let inv_var: Vec<f64> = ac.log_std.iter().map(|ls| (-2.0 * ls).exp()).collect();
    let log_norm: f64 = ac.log_std.iter().sum::<f64>() + 0.5 * act as f64 * (2.0 * PI).ln();

    let mut d_mean = Array2::<f64>::zeros((n, act));
    let mut d_log_std = vec![0.0; act];
    let mut d_v = Array2::<f64>::zeros((n, 1));
    let (mut policy_loss, mut value_loss, mut kl, mut clipped) = (0.0, 0.0, 0.0, 0usize);
    let mut per_sample = Vec::with_capacity(n);
    let mut ratios = Vec::with_capacity(n);
    let (lo, hi) = (1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);

    for i in 0..n {
        let mean = pi.output.row(i);
        let u = batch.u.row(i);
        let mut logp = -log_norm;
        for j in 0..act {
            let d = u[j] - mean[j];
            logp -= 0.5 * d * d * inv_var[j];
        }
        let ratio = (logp - batch.logp[i]).exp();
        let a = batch.adv[i];
        let unclipped = ratio * a;
        let clipped_obj = ratio.clamp(lo, hi) * a;
        let obj = unclipped.min(clipped_obj);
        policy_loss -= obj / nf;
        per_sample.push(-obj);
        ratios.push(ratio);
        kl += (batch.logp[i] - logp) / nf;
        if ratio < lo || ratio > hi {
            clipped += 1;
        }
        // The gradient flows through ρ only when the unclipped term is the minimum.
        if unclipped <= clipped_obj {
            let g = -a * ratio / nf;
            for j in 0..act {
                let d = u[j] - mean[j];
                d_mean[[i, j]] = g * d * inv_var[j];
                d_log_std[j] += g * (d * d * inv_var[j] - 1.0);
            }
        }
        let err = vt.output[[i, 0]] - batch.ret[i];
        value_loss += err * err / nf;
        d_v[[i, 0]] = 2.0 * cfg.value_coef * err / nf;
    }

    let entropy = ac.entropy();
    for g in &mut d_log_std {
        *g -= cfg.entropy_coef;
    }
    let grads = Grads {
        pi: ac.pi.backward(&pi, d_mean.view()),
        log_std: d_log_std,
        v: ac.v.backward(&vt, d_v.view()),
    };
    LossOut {
        loss: policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * entropy,
        policy_loss,
        value_loss,
        entropy,
        approx_kl: kl,
        clip_frac: clipped as f64 / nf,
        per_sample,
        ratios,
        grads,
    }
}
