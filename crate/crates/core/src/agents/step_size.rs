use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Step-size sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSizeSchedule {
    Constant(f64),
    /// `alpha0 * factor^t` at global step `t`.
    ExpDecay { alpha0: f64, factor: f64 },
    /// `c / (n + d)` where `n` counts visits to the updated state-action pair,
    /// including the current one.
    PerPairCount { c: f64, d: f64 },
}

impl StepSizeSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepSizeSchedule::Constant(a) => a > 0.0,
            StepSizeSchedule::ExpDecay { alpha0, factor } => alpha0 > 0.0 && factor > 0.0 && factor <= 1.0,
            StepSizeSchedule::PerPairCount { c, d } => c > 0.0 && d > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid step-size schedule {self:?}")))
        }
    }

    /// The nominal step size, used to label results.
    pub fn base(&self) -> f64 {
        match *self {
            StepSizeSchedule::Constant(a) => a,
            StepSizeSchedule::ExpDecay { alpha0, .. } => alpha0,
            StepSizeSchedule::PerPairCount { c, d } => c / (1.0 + d),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            StepSizeSchedule::Constant(_) => "constant",
            StepSizeSchedule::ExpDecay { .. } => "exp_decay",
            StepSizeSchedule::PerPairCount { .. } => "per_pair_count",
        }
    }

    /// Step size at global step `t` for a pair visited `visits` times.
    #[inline]
    pub fn at(&self, t: u64, visits: u64) -> f64 {
        match *self {
            StepSizeSchedule::Constant(a) => a,
            StepSizeSchedule::ExpDecay { alpha0, factor } => alpha0 * factor.powf(t as f64),
            StepSizeSchedule::PerPairCount { c, d } => c / (visits as f64 + d),
        }
    }
}

pub fn step_size(schedule: &StepSizeSchedule, t: u64, visits: u64) -> f64 {
    schedule.at(t, visits)
}
