use serde::{Deserialize, Serialize};

use super::{Optimizations, RbarStepSize, StepSizeSchedule};
use crate::{Error, Result};

/// How the average-reward estimate `Rbar` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenteringMode {
    /// `Rbar = 0` forever: plain discounted TD.
    None,
    /// `Rbar` fixed to a known average reward.
    Oracle(f64),
    /// `Rbar += beta * rho * (R - Rbar)`.
    Simple,
    /// `Rbar += beta * rho * delta`.
    ValueBased,
}

impl CenteringMode {
    pub fn label(&self) -> &'static str {
        match self {
            CenteringMode::None => "none",
            CenteringMode::Oracle(_) => "oracle",
            CenteringMode::Simple => "simple",
            CenteringMode::ValueBased => "value_based",
        }
    }

    pub fn is_centered(&self) -> bool {
        !matches!(self, CenteringMode::None)
    }
}

/// Tabular TD(0) on centered rewards:
/// `delta = (R - Rbar) + gamma V(s') - V(s)`, `V(s) += alpha rho delta`,
/// with `beta = eta * alpha` for the estimate.
#[derive(Debug, Clone)]
pub struct PredictionAgent {
    values: Vec<f64>,
    rbar: f64,
    mode: CenteringMode,
    gamma: f64,
    alpha: StepSizeSchedule,
    eta: f64,
    opts: Optimizations,
    rbar_step: RbarStepSize,
    t: u64,
    visits: Vec<u64>,
}

impl PredictionAgent {
    pub fn new(
        n_states: usize,
        mode: CenteringMode,
        gamma: f64,
        alpha: StepSizeSchedule,
        eta: f64,
        opts: Optimizations,
    ) -> Result<Self> {
        alpha.validate()?;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!("gamma {gamma} outside [0, 1]")));
        }
        if !(eta >= 0.0) {
            return Err(Error::Config(format!("eta must be non-negative, got {eta}")));
        }
        let rbar = match mode {
            CenteringMode::Oracle(r) if !r.is_finite() => {
                return Err(Error::Config("oracle average reward must be finite".into()))
            }
            CenteringMode::Oracle(r) => r,
            _ => 0.0,
        };
        Ok(Self {
            values: vec![0.0; n_states],
            rbar,
            mode,
            gamma,
            alpha,
            eta,
            opts,
            rbar_step: RbarStepSize::default(),
            t: 0,
            visits: vec![0; n_states],
        })
    }

    /// Sets the initial estimate for the learning modes; ignored otherwise.
    pub fn with_initial_rbar(mut self, rbar: f64) -> Self {
        if matches!(self.mode, CenteringMode::Simple | CenteringMode::ValueBased) {
            self.rbar = rbar;
        }
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rbar(&self) -> f64 {
        self.rbar
    }

    pub fn mode(&self) -> CenteringMode {
        self.mode
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One TD update on the transition `s -> s'` with `reward` and
    /// importance ratio `rho` (1 on-policy). Returns the TD error used for
    /// the value update.
    pub fn step(&mut self, s: usize, s_next: usize, reward: f64, rho: f64) -> f64 {
        self.visits[s] += 1;
        let alpha = self.alpha.at(self.t, self.visits[s]);
        self.t += 1;

        let next = self.gamma * self.values[s_next];
        let current = self.values[s];
        let mut delta = reward - self.rbar + next - current;

        let learned = match self.mode {
            CenteringMode::Simple => Some(reward - self.rbar),
            CenteringMode::ValueBased => Some(delta),
            CenteringMode::None | CenteringMode::Oracle(_) => None,
        };
        if let Some(error) = learned {
            let beta = self.rbar_step.next(self.eta * alpha, self.opts.unbiased_rbar);
            self.rbar += beta * rho * error;
            if self.opts.recompute_delta {
                delta = reward - self.rbar + next - current;
            }
        }

        self.values[s] += alpha * rho * delta;
        delta
    }
}
