//! Metabolic energy: whole-body power, its mass-normalized rate (MET, W/kg)
//! and the per-episode dimensionless cost of transport.
//!
//! Muscle power is activation heat, maintenance heat, shortening heat and
//! positive mechanical work of the contractile element:
//!
//! ```text
//! P = basal·M + Σ m_i (c_act a_i² + c_maint a_i g_al(l̃_i))
//!             + Σ [c_short · max(0, −l̇_m,i) · f_ce,i + max(0, −f_ce,i · l̇_m,i)]
//! ```
//!
//! with muscle mass `m_i = ρ · (f_max / σ) · l_opt`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::Model;
use crate::model::MuscleDesc;
use crate::muscle::{active_fiber_force, g_al, MuscleState};

/// Minimum forward displacement used in the cost-of-transport denominator (m).
pub const MIN_COT_DISTANCE: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum MetabolicError {
    #[error("expected {expected} muscle states, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyParams {
    /// Muscle density (kg/m³).
    pub rho: f64,
    /// Specific tension (Pa).
    pub sigma: f64,
    /// Activation heat (W/kg).
    pub c_act: f64,
    /// Maintenance heat (W/kg).
    pub c_maint: f64,
    pub c_short: f64,
    /// Whole-body basal rate (W/kg).
    pub basal: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            rho: 1059.7,
            sigma: 2.5e5,
            c_act: 40.0,
            c_maint: 74.0,
            c_short: 0.25,
            basal: 1.2,
        }
    }
}

/// Muscle mass (kg) from its physiological volume.
pub fn muscle_mass(desc: &MuscleDesc, params: &EnergyParams) -> f64 {
    params.rho * (desc.f_max_n / params.sigma) * desc.l_opt_m
}

/// Whole-body metabolic power (W), basal rate included. Activations are taken
/// from the fiber states.
pub fn metabolic_power(model: &Model, fibers: &[MuscleState], params: &EnergyParams) -> Result<f64, MetabolicError> {
    if fibers.len() != model.muscles.len() {
        return Err(MetabolicError::LengthMismatch {
            expected: model.muscles.len(),
            got: fibers.len(),
        });
    }
    let mut p = params.basal * model.total_mass;
    for (m, s) in model.muscles.iter().zip(fibers) {
        let d = &m.desc;
        let mass = muscle_mass(d, params);
        let gal = g_al(s.l_m / d.l_opt_m, &model.curves).unwrap_or(0.0);
        let f_ce = active_fiber_force(s, d, &model.curves).unwrap_or(0.0);
        let shortening = (-s.l_m_dot).max(0.0);
        p += mass * (params.c_act * s.a * s.a + params.c_maint * s.a * gal);
        p += params.c_short * shortening * f_ce + (-f_ce * s.l_m_dot).max(0.0);
    }
    Ok(p)
}

/// Metabolic rate normalized by body mass (W/kg).
pub fn met_rate(power_w: f64, body_mass_kg: f64) -> f64 {
    power_w / body_mass_kg
}

/// Running energy integral of one episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyAccount {
    /// Integrated metabolic energy (J).
    pub e_total: f64,
    /// Forward COM position at reset (m).
    pub x_start: f64,
    pub x_now: f64,
    /// MET at the most recent sample (W/kg).
    pub met_now: f64,
    pub body_mass: f64,
    /// Integrated time (s).
    pub elapsed: f64,
}

impl EnergyAccount {
    pub fn new(body_mass: f64, com_x: f64) -> Self {
        Self {
            e_total: 0.0,
            x_start: com_x,
            x_now: com_x,
            met_now: 0.0,
            body_mass,
            elapsed: 0.0,
        }
    }

    /// Rectangle-rule integration of power `p` (W) over `dt` (s).
    pub fn accumulate(&mut self, p: f64, dt: f64, com_x: f64) {
        if !(dt > 0.0) {
            return;
        }
        self.e_total += p * dt;
        self.elapsed += dt;
        self.x_now = com_x;
        self.met_now = met_rate(p, self.body_mass);
    }

    pub fn distance(&self) -> f64 {
        self.x_now - self.x_start
    }

    /// Time-averaged MET over the episode so far (W/kg).
    pub fn met_mean(&self) -> f64 {
        if self.elapsed > 0.0 {
            self.e_total / (self.body_mass * self.elapsed)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cot {
    pub value: f64,
    /// True when the displacement was below [`MIN_COT_DISTANCE`] and the floor
    /// was used instead.
    pub capped: bool,
}

/// Dimensionless cost of transport `e_total / (M · g · max(d, d_min))`.
pub fn episode_cot(account: &EnergyAccount, body_mass: f64, g: f64) -> Cot {
    let d = account.distance();
    let capped = d < MIN_COT_DISTANCE;
    let d = if capped { MIN_COT_DISTANCE } else { d };
    Cot {
        value: account.e_total / (body_mass * g * d),
        capped,
    }
}
