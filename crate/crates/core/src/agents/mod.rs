//! Learning agents.
//!
//! [`PredictionAgent`] is tabular TD(0) with one of four ways of choosing the
//! average-reward estimate subtracted from each reward. [`QAgent`] is
//! Q-learning over sparse binary features (one-hot for the tabular case,
//! tile codes for the linear case) with value-based reward centering; with
//! `eta = 0` and a zero initial estimate it is standard Q-learning.

mod control;
mod prediction;
mod step_size;

pub use control::{argmax, QAgent};
pub use prediction::{CenteringMode, PredictionAgent};
pub use step_size::{step_size, StepSizeSchedule};

use serde::{Deserialize, Serialize};

/// The two implementation refinements for the average-reward estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Optimizations {
    /// Use the unbiased constant step-size trick for the estimate, which makes
    /// it independent of its initial value after the first update.
    #[serde(default)]
    pub unbiased_rbar: bool,
    /// Update the estimate first, recompute the TD error with the new
    /// estimate, then update the values.
    #[serde(default)]
    pub recompute_delta: bool,
}

impl Optimizations {
    pub const OFF: Self = Self { unbiased_rbar: false, recompute_delta: false };
    pub const ON: Self = Self { unbiased_rbar: true, recompute_delta: true };
}

/// Step size for the average-reward estimate, `beta = eta * alpha`, with the
/// optional unbiasing trace `o <- o + beta (1 - o)`, `beta / o`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct RbarStepSize {
    trace: f64,
}

impl RbarStepSize {
    pub(crate) fn next(&mut self, base: f64, unbiased: bool) -> f64 {
        if !unbiased || base == 0.0 {
            return base;
        }
        self.trace += base * (1.0 - self.trace);
        base / self.trace
    }

    #[cfg(test)]
    pub(crate) fn trace(&self) -> f64 {
        self.trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unbiased_trace_starts_at_full_step() {
        let mut s = RbarStepSize::default();
        assert_eq!(s.next(0.1, true), 1.0);
        assert!((s.trace() - 0.1).abs() < 1e-15);
        let second = s.next(0.1, true);
        assert!((second - 0.1 / 0.19).abs() < 1e-15);
        // The trace tends to one, so the step tends to the base step.
        for _ in 0..1000 {
            s.next(0.1, true);
        }
        assert!((s.next(0.1, true) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn plain_and_zero_steps_pass_through() {
        let mut s = RbarStepSize::default();
        assert_eq!(s.next(0.3, false), 0.3);
        assert_eq!(s.next(0.0, true), 0.0);
        assert_eq!(s.trace(), 0.0);
    }
}
