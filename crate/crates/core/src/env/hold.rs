use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::reward::RewardBreakdown;
use super::{clamp_action, observe, EnvConfig, EnvError, Environment, ObsSpec, Status, StepInfo, Transition};
use crate::dynamics::{step, Model, SimState};

/// Hold a single joint at a target angle: reward `exp(−k (θ − θ*)²)` per
/// control step over a fixed horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoldConfig {
    pub target_rad: f64,
    pub k: f64,
    pub horizon_steps: usize,
    /// Initial angle drawn uniformly from `[−init_range, init_range]`.
    pub init_range: f64,
}

impl Default for HoldConfig {
    fn default() -> Self {
        Self {
            target_rad: 0.5,
            k: 5.0,
            horizon_steps: 150,
            init_range: 0.3,
        }
    }
}

pub struct HoldEnv {
    model: Arc<Model>,
    cfg: EnvConfig,
    spec: ObsSpec,
    state: SimState,
    steps: usize,
}

impl HoldEnv {
    pub fn new(model: Arc<Model>, cfg: EnvConfig) -> Result<Self, EnvError> {
        if model.ndof != 1 {
            return Err(EnvError::Config(format!("hold task needs a one-DOF model, '{}' has {}", model.desc.name, model.ndof)));
        }
        let spec = ObsSpec::for_model(&model, cfg.include_fiber_lengths);
        let state = SimState::zero(&model);
        Ok(Self {
            model,
            cfg,
            spec,
            state,
            steps: 0,
        })
    }

    pub fn reward_at(&self, theta: f64) -> f64 {
        let e = theta - self.cfg.hold.target_rad;
        (-self.cfg.hold.k * e * e).exp()
    }

    pub fn reset_to(&mut self, state: SimState) -> Vec<f64> {
        self.state = state;
        self.steps = 0;
        observe(&self.model, &self.state, &self.spec).expect("spec built from model")
    }
}

impl Environment for HoldEnv {
    fn obs_dim(&self) -> usize {
        self.spec.obs_dim()
    }

    fn action_dim(&self) -> usize {
        self.model.n_muscles()
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        let r = self.cfg.hold.init_range;
        let theta = if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
        let s = SimState::new(&self.model, vec![theta], vec![0.0]);
        self.reset_to(s)
    }

    fn step(&mut self, action: &[f64]) -> Result<Transition, EnvError> {
        let n = self.model.n_muscles();
        if action.len() != n {
            return Err(EnvError::ActionLength {
                expected: n,
                got: action.len(),
            });
        }
        let obs_now = |s: &Self| observe(&s.model, &s.state, &s.spec).expect("spec built from model");
        let aborted = |s: &Self, clamped| Transition {
            obs: obs_now(s),
            reward: 0.0,
            breakdown: RewardBreakdown::default(),
            status: Status::Aborted,
            info: StepInfo {
                clamped,
                ..StepInfo::default()
            },
        };
        if action.iter().any(|a| !a.is_finite()) {
            return Ok(aborted(self, 0));
        }
        let (a, clamped) = clamp_action(action);
        for _ in 0..self.cfg.substeps {
            match step(&self.model, &self.cfg.sim, &self.state, &a, self.cfg.physics_dt) {
                Ok(s) => self.state = s,
                Err(e) => {
                    log::warn!("simulation aborted: {e}");
                    return Ok(aborted(self, clamped));
                }
            }
        }
        self.steps += 1;
        let r = self.reward_at(self.state.q[0]);
        let status = if self.steps >= self.cfg.hold.horizon_steps {
            Status::Timeout
        } else {
            Status::Running
        };
        Ok(Transition {
            obs: obs_now(self),
            reward: r,
            breakdown: RewardBreakdown {
                total: r,
                ..RewardBreakdown::default()
            },
            status,
            info: StepInfo {
                clamped,
                ..StepInfo::default()
            },
        })
    }

    fn state(&self) -> &SimState {
        &self.state
    }
}
