//! Continuing environments.
//!
//! Every environment is a seedable step simulator with no terminal states.
//! The tabular ones can also export an exact [`FiniteMdp`] for the solver.

mod access_control;
mod catch;
mod puck_world;
mod random_walk;
mod shift;
mod three_state;

pub use access_control::{AccessControl, AccessControlParams};
pub use catch::{Catch, CatchParams};
pub use puck_world::{PuckWorld, PuckWorldParams};
pub use random_walk::RandomWalk7;
pub use shift::{shift_rewards, ShiftRewards};
pub use three_state::ThreeStateMrp;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mdp::FiniteMdp;
use crate::{Error, Result};

/// Random number generator used by every environment.
pub type EnvRng = ChaCha8Rng;

pub(crate) fn env_rng(seed: u64) -> EnvRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// What the agent sees before featurization.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Discrete(usize),
    Real(Vec<f64>),
}

impl Observation {
    pub fn as_discrete(&self) -> Option<usize> {
        match self {
            Observation::Discrete(s) => Some(*s),
            Observation::Real(_) => None,
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Observation::Real(x) => Some(x),
            Observation::Discrete(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ObservationSpace {
    Discrete { n_states: usize },
    Real { ranges: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvDescriptor {
    pub name: String,
    pub n_actions: usize,
    pub observation: ObservationSpace,
    pub has_exact_mdp: bool,
}

impl EnvDescriptor {
    /// Number of states for discrete observation spaces.
    pub fn n_states(&self) -> Option<usize> {
        match self.observation {
            ObservationSpace::Discrete { n_states } => Some(n_states),
            ObservationSpace::Real { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub reward: f64,
    pub next_obs: Observation,
}

/// A continuing environment. The agent acts, the environment answers with
/// a reward and the next observation, forever.
pub trait Environment: Send {
    fn descriptor(&self) -> &EnvDescriptor;

    /// The current observation.
    fn observation(&self) -> Observation;

    fn step(&mut self, action: usize) -> Result<StepResult>;

    /// The exact tabular model, for environments that have one.
    fn as_finite_mdp(&self) -> Result<FiniteMdp> {
        Err(Error::Unsupported(format!(
            "{} has no finite MDP export",
            self.descriptor().name
        )))
    }
}

impl Environment for Box<dyn Environment> {
    fn descriptor(&self) -> &EnvDescriptor {
        (**self).descriptor()
    }

    fn observation(&self) -> Observation {
        (**self).observation()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        (**self).step(action)
    }

    fn as_finite_mdp(&self) -> Result<FiniteMdp> {
        (**self).as_finite_mdp()
    }
}

pub(crate) fn check_action(desc: &EnvDescriptor, action: usize) -> Result<()> {
    if action < desc.n_actions {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "action {action} out of range for {} ({} actions)",
            desc.name, desc.n_actions
        )))
    }
}

/// Environment selection as it appears in experiment configs, e.g.
/// `{"name": "access_control", "n_servers": 10}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum EnvConfig {
    ThreeStateMrp,
    #[serde(rename = "random_walk_7")]
    RandomWalk7,
    AccessControl(#[serde(default)] AccessControlParams),
    Catch(#[serde(default)] CatchParams),
    PuckWorld(#[serde(default)] PuckWorldParams),
}

impl EnvConfig {
    pub fn name(&self) -> &'static str {
        match self {
            EnvConfig::ThreeStateMrp => "three_state_mrp",
            EnvConfig::RandomWalk7 => "random_walk_7",
            EnvConfig::AccessControl(_) => "access_control",
            EnvConfig::Catch(_) => "catch",
            EnvConfig::PuckWorld(_) => "puck_world",
        }
    }
}

/// Instantiates an environment. Identical `(config, seed)` pairs yield
/// bitwise-identical streams for identical action sequences.
pub fn make_env(config: &EnvConfig, seed: u64) -> Result<Box<dyn Environment>> {
    Ok(match config {
        EnvConfig::ThreeStateMrp => Box::new(ThreeStateMrp::new()),
        EnvConfig::RandomWalk7 => Box::new(RandomWalk7::new()),
        EnvConfig::AccessControl(p) => Box::new(AccessControl::new(p.clone(), seed)?),
        EnvConfig::Catch(p) => Box::new(Catch::new(p.clone(), seed)?),
        EnvConfig::PuckWorld(p) => Box::new(PuckWorld::new(p.clone(), seed)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_with_defaults() {
        let c: EnvConfig = serde_json::from_str(r#"{"name":"access_control"}"#).unwrap();
        assert_eq!(c, EnvConfig::AccessControl(AccessControlParams::default()));
        let c: EnvConfig = serde_json::from_str(r#"{"name":"catch","rows":8}"#).unwrap();
        match c {
            EnvConfig::Catch(p) => assert_eq!((p.rows, p.cols), (8, 5)),
            _ => panic!(),
        }
        let c: EnvConfig = serde_json::from_str(r#"{"name":"random_walk_7"}"#).unwrap();
        assert_eq!(c.name(), "random_walk_7");
    }

    #[test]
    fn descriptors_have_at_least_two_actions() {
        for cfg in [
            EnvConfig::ThreeStateMrp,
            EnvConfig::RandomWalk7,
            EnvConfig::AccessControl(Default::default()),
            EnvConfig::Catch(Default::default()),
            EnvConfig::PuckWorld(Default::default()),
        ] {
            let env = make_env(&cfg, 1).unwrap();
            assert!(env.descriptor().n_actions >= 2);
            assert_eq!(env.descriptor().name, cfg.name());
        }
    }

    #[test]
    fn out_of_range_action_is_usage_error() {
        let mut env = make_env(&EnvConfig::RandomWalk7, 0).unwrap();
        assert!(matches!(env.step(2), Err(Error::Usage(_))));
    }

    #[test]
    fn continuous_envs_have_no_mdp() {
        let env = make_env(&EnvConfig::Catch(Default::default()), 0).unwrap();
        assert!(matches!(env.as_finite_mdp(), Err(Error::Unsupported(_))));
    }
}
