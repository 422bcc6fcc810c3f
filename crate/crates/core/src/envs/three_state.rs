use super::{check_action, EnvDescriptor, Environment, Observation, ObservationSpace, StepResult};
use crate::mdp::FiniteMdp;
use crate::Result;

/// Deterministic cycle A -> B -> C -> A with reward 3 on A -> B.
///
/// Both actions behave identically; the second exists only so the
/// environment has a real choice to offer.
#[derive(Debug, Clone)]
pub struct ThreeStateMrp {
    desc: EnvDescriptor,
    state: usize,
}

impl ThreeStateMrp {
    pub const A: usize = 0;
    pub const B: usize = 1;
    pub const C: usize = 2;

    pub fn new() -> Self {
        Self::starting_at(Self::A)
    }

    pub fn starting_at(state: usize) -> Self {
        assert!(state < 3);
        Self {
            desc: EnvDescriptor {
                name: "three_state_mrp".into(),
                n_actions: 2,
                observation: ObservationSpace::Discrete { n_states: 3 },
                has_exact_mdp: true,
            },
            state,
        }
    }

    fn transition(s: usize) -> (usize, f64) {
        match s {
            Self::A => (Self::B, 3.0),
            Self::B => (Self::C, 0.0),
            _ => (Self::A, 0.0),
        }
    }
}

impl Default for ThreeStateMrp {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for ThreeStateMrp {
    fn descriptor(&self) -> &EnvDescriptor {
        &self.desc
    }

    fn observation(&self) -> Observation {
        Observation::Discrete(self.state)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        check_action(&self.desc, action)?;
        let (next, reward) = Self::transition(self.state);
        self.state = next;
        Ok(StepResult { reward, next_obs: Observation::Discrete(next) })
    }

    fn as_finite_mdp(&self) -> Result<FiniteMdp> {
        let mut mdp = FiniteMdp::zeros(3, 2)?;
        for s in 0..3 {
            let (next, reward) = Self::transition(s);
            for a in 0..2 {
                mdp.set(s, a, next, 1.0, reward);
            }
        }
        Ok(mdp)
    }
}
