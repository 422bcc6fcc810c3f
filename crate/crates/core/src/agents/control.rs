use rand::Rng;

use super::{Optimizations, RbarStepSize, StepSizeSchedule};
use crate::features::SparseFeatures;
use crate::{Error, Result};

pub use crate::solver::argmax;

/// Q-learning with value-based reward centering over sparse binary features.
///
/// Action values are `w_a . x`. Each update computes
/// `delta = R - Rbar + gamma max_a' w_a' . x' - w_a . x`, moves `w_a` by
/// `(alpha / n_active) delta` on the active features of `x`, and moves
/// `Rbar` by `eta alpha delta`.
#[derive(Debug, Clone)]
pub struct QAgent {
    /// `[action][feature]`.
    weights: Vec<Vec<f64>>,
    rbar: f64,
    gamma: f64,
    alpha: StepSizeSchedule,
    eta: f64,
    epsilon: f64,
    opts: Optimizations,
    rbar_step: RbarStepSize,
    t: u64,
    /// `[action][feature]` visit counts, keyed by the first active feature.
    visits: Vec<Vec<u64>>,
}

impl QAgent {
    pub fn new(
        n_actions: usize,
        feature_dim: usize,
        gamma: f64,
        alpha: StepSizeSchedule,
        eta: f64,
        epsilon: f64,
        opts: Optimizations,
    ) -> Result<Self> {
        alpha.validate()?;
        if n_actions == 0 || feature_dim == 0 {
            return Err(Error::Config("Q-agent needs at least one action and one feature".into()));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!("gamma {gamma} outside [0, 1]")));
        }
        if !(eta >= 0.0) {
            return Err(Error::Config(format!("eta must be non-negative, got {eta}")));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Config(format!("epsilon {epsilon} outside [0, 1]")));
        }
        let counted = matches!(alpha, StepSizeSchedule::PerPairCount { .. });
        Ok(Self {
            weights: vec![vec![0.0; feature_dim]; n_actions],
            rbar: 0.0,
            gamma,
            alpha,
            eta,
            epsilon,
            opts,
            rbar_step: RbarStepSize::default(),
            t: 0,
            visits: if counted { vec![vec![0; feature_dim]; n_actions] } else { Vec::new() },
        })
    }

    pub fn with_initial_rbar(mut self, rbar: f64) -> Self {
        self.rbar = rbar;
        self
    }

    pub fn n_actions(&self) -> usize {
        self.weights.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn rbar(&self) -> f64 {
        self.rbar
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Tabular view: `q[s][a]` when the features are one-hot states.
    pub fn q_table(&self) -> Vec<Vec<f64>> {
        (0..self.feature_dim())
            .map(|s| self.weights.iter().map(|w| w[s]).collect())
            .collect()
    }

    #[inline]
    pub fn action_value(&self, x: &SparseFeatures, a: usize) -> f64 {
        x.dot(&self.weights[a])
    }

    pub fn action_values(&self, x: &SparseFeatures) -> Vec<f64> {
        self.weights.iter().map(|w| x.dot(w)).collect()
    }

    pub fn max_action_value(&self, x: &SparseFeatures) -> f64 {
        self.weights
            .iter()
            .map(|w| x.dot(w))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action, lowest index on ties.
    pub fn greedy(&self, x: &SparseFeatures) -> usize {
        let mut best = 0;
        let mut best_value = self.action_value(x, 0);
        for a in 1..self.n_actions() {
            let v = self.action_value(x, a);
            if v > best_value {
                best = a;
                best_value = v;
            }
        }
        best
    }

    /// Epsilon-greedy: one uniform draw decides whether to explore, a second
    /// picks the exploratory action.
    pub fn select_action<R: Rng + ?Sized>(&self, x: &SparseFeatures, rng: &mut R) -> usize {
        if rng.gen::<f64>() < self.epsilon {
            rng.gen_range(0..self.n_actions())
        } else {
            self.greedy(x)
        }
    }

    /// One Q-learning update on `(x, a, reward, x')`; returns the TD error
    /// applied to the weights.
    pub fn step(&mut self, x: &SparseFeatures, a: usize, reward: f64, x_next: &SparseFeatures) -> f64 {
        let visits = match self.visits.get_mut(a) {
            Some(row) => {
                let key = x.active()[0];
                row[key] += 1;
                row[key]
            }
            None => 0,
        };
        let alpha = self.alpha.at(self.t, visits);
        self.t += 1;

        // Evaluated left to right so that with a zero estimate this is the
        // plain Q-learning error `reward + gamma max - q` bit for bit.
        let next = self.gamma * self.max_action_value(x_next);
        let current = self.action_value(x, a);
        let mut delta = reward - self.rbar + next - current;

        let beta = self.rbar_step.next(self.eta * alpha, self.opts.unbiased_rbar);
        self.rbar += beta * delta;
        if self.opts.recompute_delta {
            delta = reward - self.rbar + next - current;
        }

        let step = alpha / x.active().len() as f64 * delta;
        let w = &mut self.weights[a];
        for &i in x.active() {
            w[i] += step;
        }
        delta
    }
}
