//! Actor-critic: a Gaussian policy in pre-squash space whose samples are
//! mapped to activations by the logistic function, and a state-value network.

use std::f64::consts::PI;

use ndarray::ArrayView2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::nn::Mlp;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorCritic {
    /// Observation → pre-squash action mean.
    pub pi: Mlp,
    /// State-independent log standard deviation per action dimension.
    pub log_std: Vec<f64>,
    /// Observation → state value.
    pub v: Mlp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSample {
    /// Pre-squash sample.
    pub u: Vec<f64>,
    /// Activation `σ(u)` in (0, 1).
    pub a: Vec<f64>,
    pub logp: f64,
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Log density of a diagonal Gaussian.
pub fn gaussian_logp(u: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    u.iter()
        .zip(mean)
        .zip(log_std)
        .map(|((&u, &m), &ls)| {
            let z = (u - m) * (-ls).exp();
            -0.5 * z * z - ls - 0.5 * (2.0 * PI).ln()
        })
        .sum()
}

impl ActorCritic {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, act_dim: usize, hidden: &[usize], init_log_std: f64, rng: &mut R) -> Self {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        let mut pi_sizes = sizes.clone();
        pi_sizes.push(act_dim);
        sizes.push(1);
        Self {
            pi: Mlp::new(&pi_sizes, 0.01, rng),
            log_std: vec![init_log_std.clamp(LOG_STD_MIN, LOG_STD_MAX); act_dim],
            v: Mlp::new(&sizes, 1.0, rng),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.pi.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.pi.output_dim()
    }

    /// Samples an action, or returns the squashed mean when `deterministic`.
    pub fn act<R: Rng + ?Sized>(&self, obs: &[f64], deterministic: bool, rng: &mut R) -> ActionSample {
        let mean = self.pi.forward_one(obs);
        let u: Vec<f64> = if deterministic {
            mean.clone()
        } else {
            mean.iter()
                .zip(&self.log_std)
                .map(|(m, ls)| {
                    let z: f64 = StandardNormal.sample(rng);
                    m + ls.exp() * z
                })
                .collect()
        };
        let logp = gaussian_logp(&u, &mean, &self.log_std);
        ActionSample {
            a: u.iter().map(|&x| sigmoid(x)).collect(),
            u,
            logp,
        }
    }

    pub fn values(&self, obs: ArrayView2<f64>) -> Vec<f64> {
        self.v.forward(obs).output.into_raw_vec_and_offset().0
    }

    pub fn clamp_log_std(&mut self) {
        for ls in &mut self.log_std {
            *ls = ls.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    /// Entropy of the pre-squash Gaussian.
    pub fn entropy(&self) -> f64 {
        self.log_std.iter().map(|ls| ls + 0.5 * (2.0 * PI * std::f64::consts::E).ln()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.pi.params.iter().chain(&self.log_std).chain(&self.v.params).all(|x| x.is_finite())
    }
}
