use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_action, env_rng, EnvDescriptor, EnvRng, Environment, Observation, ObservationSpace, StepResult};
use crate::mdp::FiniteMdp;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AccessControlParams {
    pub n_servers: usize,
    /// Per-step probability that each busy server becomes free.
    pub free_prob: f64,
    pub priorities: Vec<f64>,
}

impl Default for AccessControlParams {
    fn default() -> Self {
        Self { n_servers: 10, free_prob: 0.06, priorities: vec![1.0, 2.0, 4.0, 8.0] }
    }
}

/// Access-control queuing.
///
/// The state is `(free servers, priority of the job at the head of the
/// queue)`, encoded as `free * n_priorities + priority_index`. Accepting a
/// job when a server is free pays its priority and occupies a server;
/// otherwise the job is dropped for zero reward. Afterwards every busy server
/// frees independently with `free_prob`, and the next job's priority is drawn
/// uniformly. The queue never empties.
#[derive(Debug, Clone)]
pub struct AccessControl {
    params: AccessControlParams,
    desc: EnvDescriptor,
    free: usize,
    priority: usize,
    rng: EnvRng,
}

impl AccessControl {
    pub const ACCEPT: usize = 0;
    pub const REJECT: usize = 1;

    pub fn new(params: AccessControlParams, seed: u64) -> Result<Self> {
        if params.priorities.is_empty() {
            return Err(Error::Config("access_control needs at least one priority".into()));
        }
        if !(0.0..=1.0).contains(&params.free_prob) {
            return Err(Error::Config(format!("free_prob {} outside [0, 1]", params.free_prob)));
        }
        let n_states = (params.n_servers + 1) * params.priorities.len();
        let desc = EnvDescriptor {
            name: "access_control".into(),
            n_actions: 2,
            observation: ObservationSpace::Discrete { n_states },
            has_exact_mdp: true,
        };
        let mut rng = env_rng(seed);
        let priority = rng.gen_range(0..params.priorities.len());
        let free = params.n_servers;
        Ok(Self { params, desc, free, priority, rng })
    }

    /// Places the environment in a given `(free, priority index)` state.
    pub fn set_state(&mut self, free: usize, priority: usize) {
        assert!(free <= self.params.n_servers && priority < self.params.priorities.len());
        self.free = free;
        self.priority = priority;
    }

    pub fn free_servers(&self) -> usize {
        self.free
    }

    pub fn state_index(&self, free: usize, priority: usize) -> usize {
        free * self.params.priorities.len() + priority
    }

    /// Servers left free and reward after the agent's decision, before any
    /// server is released.
    fn decide(&self, free: usize, priority: usize, action: usize) -> (usize, f64) {
        if action == Self::ACCEPT && free > 0 {
            (free - 1, self.params.priorities[priority])
        } else {
            (free, 0.0)
        }
    }
}

fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut coeff = 1.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                coeff = coeff * (n - k + 1) as f64 / k as f64;
            }
            coeff * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
        })
        .collect()
}

impl Environment for AccessControl {
    fn descriptor(&self) -> &EnvDescriptor {
        &self.desc
    }

    fn observation(&self) -> Observation {
        Observation::Discrete(self.state_index(self.free, self.priority))
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        check_action(&self.desc, action)?;
        let (mut free, reward) = self.decide(self.free, self.priority, action);
        let busy = self.params.n_servers - free;
        for _ in 0..busy {
            if self.rng.gen::<f64>() < self.params.free_prob {
                free += 1;
            }
        }
        self.free = free;
        self.priority = self.rng.gen_range(0..self.params.priorities.len());
        Ok(StepResult { reward, next_obs: self.observation() })
    }

    fn as_finite_mdp(&self) -> Result<FiniteMdp> {
        let n_pri = self.params.priorities.len();
        let n_states = (self.params.n_servers + 1) * n_pri;
        let mut mdp = FiniteMdp::zeros(n_states, 2)?;
        for free in 0..=self.params.n_servers {
            for pri in 0..n_pri {
                let s = self.state_index(free, pri);
                for a in 0..2 {
                    let (left, reward) = self.decide(free, pri, a);
                    let busy = self.params.n_servers - left;
                    for (k, pk) in binomial_pmf(busy, self.params.free_prob).into_iter().enumerate() {
                        for next_pri in 0..n_pri {
                            let s2 = self.state_index(left + k, next_pri);
                            mdp.set(s, a, s2, pk / n_pri as f64, reward);
                        }
                    }
                }
            }
        }
        Ok(mdp)
    }
}
