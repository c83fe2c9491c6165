//! The seven experiment configurations as overlays on a training config.

use myowalk_core::env::{EnergyTerm, ResetMode, Stage};
use myowalk_learn::TrainConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Dense MET reward until the return plateaus, then terminal CoT;
    /// leg-lift reset.
    Ours,
    /// Stage 1 for the whole run.
    MetOnly,
    /// Stage 2 from the first iteration.
    CotOnly,
    /// No energy term in either stage.
    NoEnergy,
    /// Both feet on the ground at reset.
    DoubleStance,
    /// Mean squared activation replaces MET in the dense energy term.
    ActivationSq,
    /// Fiber lengths left out of the observation.
    NoFiberObs,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Ours,
        Preset::MetOnly,
        Preset::CotOnly,
        Preset::NoEnergy,
        Preset::DoubleStance,
        Preset::ActivationSq,
        Preset::NoFiberObs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Ours => "ours",
            Preset::MetOnly => "met_only",
            Preset::CotOnly => "cot_only",
            Preset::NoEnergy => "no_energy",
            Preset::DoubleStance => "double_stance",
            Preset::ActivationSq => "activation_sq",
            Preset::NoFiberObs => "no_fiber_obs",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|p| p.name()).collect()
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CliError::UnknownPreset(s.to_string()))
    }

    /// The config keys this preset sets, as `key = value` lines.
    pub fn delta(self) -> &'static [&'static str] {
        match self {
            Preset::Ours => &["stage.fixed = null", "env.reset.mode = \"leg_lift_random\""],
            Preset::MetOnly => &["stage.fixed = 1"],
            Preset::CotOnly => &["stage.fixed = 2"],
            Preset::NoEnergy => &["env.reward.w_eng = 0", "env.reward.w_cot = 0"],
            Preset::DoubleStance => &["env.reset.mode = \"double_stance\""],
            Preset::ActivationSq => &["env.reward.energy_term = \"activation_sq\""],
            Preset::NoFiberObs => &["env.include_fiber_lengths = false"],
        }
    }

    pub fn apply(self, cfg: &mut TrainConfig) {
        match self {
            Preset::Ours => {
                cfg.stage.fixed = None;
                cfg.env.reset.mode = ResetMode::LegLiftRandom;
            }
            Preset::MetOnly => cfg.stage.fixed = Some(Stage::Dense),
            Preset::CotOnly => cfg.stage.fixed = Some(Stage::Sparse),
            Preset::NoEnergy => {
                cfg.env.reward.w_eng = 0.0;
                cfg.env.reward.w_cot = 0.0;
            }
            Preset::DoubleStance => cfg.env.reset.mode = ResetMode::DoubleStance,
            Preset::ActivationSq => cfg.env.reward.energy_term = EnergyTerm::ActivationSq,
            Preset::NoFiberObs => cfg.env.include_fiber_lengths = false,
        }
        cfg.preset = Some(self.name().to_string());
    }
}
