//! The dense→sparse reward schedule: train on per-step MET until the return
//! stops improving, then switch to the terminal cost-of-transport reward.

use myowalk_core::env::Stage;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageConfig {
    /// Trailing window (iterations) over which improvement is measured.
    pub window: usize,
    /// Switch when the smoothed return improves by less than this fraction
    /// across the window.
    pub min_rel_improvement: f64,
    /// Moving-average length.
    pub smoothing: usize,
    /// First iteration (1-based) forced into stage 2.
    pub force_switch_at: Option<u64>,
    /// Fraction of the run after which stage 2 starts even without
    /// convergence, so every completed run contains the switch.
    pub fallback_fraction: Option<f64>,
    /// Pins the stage for the whole run and disables switching.
    pub fixed: Option<Stage>,
}

impl Default for StageConfig {
    fn default() -> Self {
        Self {
            window: 100,
            min_rel_improvement: 0.02,
            smoothing: 50,
            force_switch_at: None,
            fallback_fraction: Some(0.5),
            fixed: None,
        }
    }
}

impl StageConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.smoothing == 0 || self.smoothing > self.window {
            return Err(format!(
                "stage.smoothing must be in [1, window={}], got {}",
                self.window, self.smoothing
            ));
        }
        if let Some(f) = self.fallback_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(format!("stage.fallback_fraction must be in (0, 1], got {f}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageController {
    pub cfg: StageConfig,
    pub total_iterations: u64,
    pub stage: Stage,
    /// First iteration run in stage 2.
    pub switch_iteration: Option<u64>,
    /// Stage-1 mean returns, one per iteration.
    pub history: Vec<f64>,
}

impl StageController {
    pub fn new(cfg: StageConfig, total_iterations: u64) -> Self {
        let mut c = Self {
            stage: cfg.fixed.unwrap_or(Stage::Dense),
            cfg,
            total_iterations,
            switch_iteration: None,
            history: Vec::new(),
        };
        if c.cfg.fixed.is_none() && c.cfg.force_switch_at.is_some_and(|f| f <= 1) {
            c.switch(1);
        }
        c
    }

    fn switch(&mut self, next: u64) {
        self.stage = Stage::Sparse;
        self.switch_iteration = Some(next);
        log::info!("switching to the sparse energy reward at iteration {next}");
    }

    /// Relative improvement of the latest moving average over the one at the
    /// start of the trailing window, once enough history exists.
    pub fn relative_improvement(&self) -> Option<f64> {
        let (w, s) = (self.cfg.window, self.cfg.smoothing);
        let n = self.history.len();
        if n < w {
            return None;
        }
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        let recent = mean(&self.history[n - s..]);
        let earlier = mean(&self.history[n - w..n - w + s]);
        Some((recent - earlier) / earlier.abs().max(1e-12))
    }

    /// Records the mean return of completed iteration `iteration` (1-based)
    /// and returns the stage for the next iteration. `None` means no episode
    /// finished in that iteration.
    pub fn update(&mut self, iteration: u64, mean_return: Option<f64>) -> Stage {
        if self.cfg.fixed.is_some() || self.stage == Stage::Sparse {
            return self.stage;
        }
        if let Some(r) = mean_return.filter(|r| r.is_finite()) {
            self.history.push(r);
        }
        let next = iteration + 1;
        let forced = self.cfg.force_switch_at.is_some_and(|f| next >= f);
        let fallback = self
            .cfg
            .fallback_fraction
            .is_some_and(|f| next as f64 > f * self.total_iterations as f64);
        let converged = self.relative_improvement().is_some_and(|r| r < self.cfg.min_rel_improvement);
        if forced || fallback || converged {
            self.switch(next);
        }
        self.stage
    }
}
