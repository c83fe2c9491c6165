//! The six-term locomotion reward. Every term is a weight times an
//! exponential of a squared error, so each lies in `[0, w]`.

use serde::{Deserialize, Serialize};

use super::{Stage, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyTerm {
    /// `w_eng · exp(−k_eng · MET)`.
    #[default]
    Met,
    /// `w_eng · exp(−k_act · mean(a²))`.
    ActivationSq,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub w_up: f64,
    pub w_ori: f64,
    pub w_eng: f64,
    pub w_vel: f64,
    pub w_dev: f64,
    pub w_alive: f64,
    /// rad⁻²
    pub k_up: f64,
    /// rad⁻²
    pub k_ori: f64,
    /// kg/W
    pub k_eng: f64,
    /// s²/m²
    pub k_vel: f64,
    /// m⁻²
    pub k_dev: f64,
    /// m/s
    pub v_target: f64,
    pub w_cot: f64,
    pub k_cot: f64,
    pub energy_term: EnergyTerm,
    pub k_act: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            w_up: 1.0,
            w_ori: 1.0,
            w_eng: 1.0,
            w_vel: 1.0,
            w_dev: 1.0,
            w_alive: 0.5,
            k_up: 5.0,
            k_ori: 5.0,
            k_eng: 0.2,
            k_vel: 2.0,
            k_dev: 10.0,
            v_target: 1.2,
            w_cot: 10.0,
            k_cot: 2.0,
            energy_term: EnergyTerm::Met,
            k_act: 5.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("w_up", self.w_up),
            ("w_ori", self.w_ori),
            ("w_eng", self.w_eng),
            ("w_vel", self.w_vel),
            ("w_dev", self.w_dev),
            ("w_alive", self.w_alive),
            ("k_up", self.k_up),
            ("k_ori", self.k_ori),
            ("k_eng", self.k_eng),
            ("k_vel", self.k_vel),
            ("k_dev", self.k_dev),
            ("w_cot", self.w_cot),
            ("k_cot", self.k_cot),
            ("k_act", self.k_act),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("reward.{name} must be finite and ≥ 0, got {v}"));
            }
        }
        Ok(())
    }

    /// Upper bound of the per-step total in stage 1.
    pub fn dense_bound(&self) -> f64 {
        self.w_up + self.w_ori + self.w_eng + self.w_vel + self.w_dev + self.w_alive
    }
}

/// Scalar features of one control step that the reward reads.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RewardInputs {
    /// Angle between the torso up axis and world vertical (rad).
    pub torso_tilt: f64,
    pub pelvis_roll: f64,
    pub pelvis_pitch: f64,
    /// Forward COM velocity averaged over the control step (m/s).
    pub v_com_x: f64,
    /// Lateral COM position (m).
    pub z_com: f64,
    /// MET averaged over the control step (W/kg).
    pub met: f64,
    pub mean_sq_activation: f64,
    /// Episode cost of transport, read on terminal steps of stage 2.
    pub cot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RewardBreakdown {
    pub r_up: f64,
    pub r_ori: f64,
    pub r_eng: f64,
    pub r_vel: f64,
    pub r_dev: f64,
    pub r_alive: f64,
    pub r_cot_terminal: f64,
    pub total: f64,
    pub stage: u8,
}

pub fn reward(inp: &RewardInputs, status: Status, stage: Stage, cfg: &RewardConfig) -> RewardBreakdown {
    let sq = |x: f64| x * x;
    let r_eng = match stage {
        Stage::Sparse => 0.0,
        Stage::Dense => match cfg.energy_term {
            EnergyTerm::Met => cfg.w_eng * (-cfg.k_eng * inp.met).exp(),
            EnergyTerm::ActivationSq => cfg.w_eng * (-cfg.k_act * inp.mean_sq_activation).exp(),
        },
    };
    let terminal = matches!(status, Status::Fell | Status::Timeout);
    let r_cot_terminal = if stage == Stage::Sparse && terminal {
        cfg.w_cot * (-cfg.k_cot * inp.cot).exp()
    } else {
        0.0
    };
    let mut b = RewardBreakdown {
        r_up: cfg.w_up * (-cfg.k_up * sq(inp.torso_tilt)).exp(),
        r_ori: cfg.w_ori * (-cfg.k_ori * (sq(inp.pelvis_roll) + sq(inp.pelvis_pitch))).exp(),
        r_eng,
        r_vel: cfg.w_vel * (-cfg.k_vel * sq(inp.v_com_x - cfg.v_target)).exp(),
        r_dev: cfg.w_dev * (-cfg.k_dev * sq(inp.z_com)).exp(),
        r_alive: if matches!(status, Status::Fell | Status::Aborted) { 0.0 } else { cfg.w_alive },
        r_cot_terminal,
        total: 0.0,
        stage: stage.number(),
    };
    b.total = b.r_up + b.r_ori + b.r_eng + b.r_vel + b.r_dev + b.r_alive + b.r_cot_terminal;
    b
}
