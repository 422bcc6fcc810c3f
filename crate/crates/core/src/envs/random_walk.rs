use super::{check_action, EnvDescriptor, Environment, Observation, ObservationSpace, StepResult};
use crate::mdp::FiniteMdp;
use crate::Result;

/// Seven states in a row with actions left (0) and right (1).
///
/// Interior moves go to the neighbouring state with reward 0. Going left
/// from state 0 or right from state 6 jumps to the middle state 3 with
/// reward +1 or +7 respectively.
#[derive(Debug, Clone)]
pub struct RandomWalk7 {
    desc: EnvDescriptor,
    state: usize,
}

impl RandomWalk7 {
    pub const N_STATES: usize = 7;
    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;
    pub const MIDDLE: usize = 3;

    pub fn new() -> Self {
        Self::starting_at(Self::MIDDLE)
    }

    pub fn starting_at(state: usize) -> Self {
        assert!(state < Self::N_STATES);
        Self {
            desc: EnvDescriptor {
                name: "random_walk_7".into(),
                n_actions: 2,
                observation: ObservationSpace::Discrete { n_states: Self::N_STATES },
                has_exact_mdp: true,
            },
            state,
        }
    }

    fn transition(s: usize, a: usize) -> (usize, f64) {
        match (s, a) {
            (0, Self::LEFT) => (Self::MIDDLE, 1.0),
            (6, Self::RIGHT) => (Self::MIDDLE, 7.0),
            (s, Self::LEFT) => (s - 1, 0.0),
            (s, _) => (s + 1, 0.0),
        }
    }
}

impl Default for RandomWalk7 {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for RandomWalk7 {
    fn descriptor(&self) -> &EnvDescriptor {
        &self.desc
    }

    fn observation(&self) -> Observation {
        Observation::Discrete(self.state)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        check_action(&self.desc, action)?;
        let (next, reward) = Self::transition(self.state, action);
        self.state = next;
        Ok(StepResult { reward, next_obs: Observation::Discrete(next) })
    }

    fn as_finite_mdp(&self) -> Result<FiniteMdp> {
        let mut mdp = FiniteMdp::zeros(Self::N_STATES, 2)?;
        for s in 0..Self::N_STATES {
            for a in 0..2 {
                let (next, reward) = Self::transition(s, a);
                mdp.set(s, a, next, 1.0, reward);
            }
        }
        Ok(mdp)
    }
}
