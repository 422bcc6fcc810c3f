use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_action, env_rng, EnvDescriptor, EnvRng, Environment, Observation, ObservationSpace, StepResult};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PuckWorldParams {
    /// The goal moves every this many steps.
    pub goal_interval: u64,
    pub damping: f64,
    pub thrust: f64,
    /// Velocity components are clipped to `[-velocity_clip, velocity_clip]`
    /// in the observation.
    pub velocity_clip: f64,
}

impl Default for PuckWorldParams {
    fn default() -> Self {
        Self { goal_interval: 500, damping: 0.98, thrust: 0.002, velocity_clip: 0.05 }
    }
}

/// A puck in the unit square chasing a goal that relocates periodically.
///
/// Actions thrust north (0), south (1), east (2), west (3) or not at all (4).
/// Each step `v <- damping v + thrust dir`, `x <- x + v`; hitting a wall
/// clamps the position and negates and halves that velocity component. The
/// reward is minus the distance from the puck to the goal.
#[derive(Debug, Clone)]
pub struct PuckWorld {
    params: PuckWorldParams,
    desc: EnvDescriptor,
    pos: [f64; 2],
    vel: [f64; 2],
    goal: [f64; 2],
    t: u64,
    rng: EnvRng,
}

const DIRECTIONS: [[f64; 2]; 5] = [[0.0, 1.0], [0.0, -1.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]];

impl PuckWorld {
    pub const NONE: usize = 4;

    pub fn new(params: PuckWorldParams, seed: u64) -> Result<Self> {
        if params.goal_interval == 0 || params.velocity_clip <= 0.0 {
            return Err(Error::Config("puck_world needs a positive goal interval and velocity clip".into()));
        }
        let clip = params.velocity_clip;
        let desc = EnvDescriptor {
            name: "puck_world".into(),
            n_actions: 5,
            observation: ObservationSpace::Real {
                ranges: vec![(0.0, 1.0), (0.0, 1.0), (-clip, clip), (-clip, clip), (0.0, 1.0), (0.0, 1.0)],
            },
            has_exact_mdp: false,
        };
        let mut rng = env_rng(seed);
        let pos = [rng.gen::<f64>(), rng.gen::<f64>()];
        let goal = [rng.gen::<f64>(), rng.gen::<f64>()];
        Ok(Self { params, desc, pos, vel: [0.0; 2], goal, t: 0, rng })
    }

    /// Overrides the kinematic state.
    pub fn set_state(&mut self, pos: [f64; 2], vel: [f64; 2], goal: [f64; 2]) {
        self.pos = pos;
        self.vel = vel;
        self.goal = goal;
    }

    pub fn position(&self) -> [f64; 2] {
        self.pos
    }

    pub fn goal(&self) -> [f64; 2] {
        self.goal
    }

    fn distance_to_goal(&self) -> f64 {
        (self.pos[0] - self.goal[0]).hypot(self.pos[1] - self.goal[1])
    }
}

impl Environment for PuckWorld {
    fn descriptor(&self) -> &EnvDescriptor {
        &self.desc
    }

    fn observation(&self) -> Observation {
        let c = self.params.velocity_clip;
        Observation::Real(vec![
            self.pos[0],
            self.pos[1],
            self.vel[0].clamp(-c, c),
            self.vel[1].clamp(-c, c),
            self.goal[0],
            self.goal[1],
        ])
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        check_action(&self.desc, action)?;
        let dir = DIRECTIONS[action];
        for d in 0..2 {
            self.vel[d] = self.params.damping * self.vel[d] + self.params.thrust * dir[d];
            self.pos[d] += self.vel[d];
            if self.pos[d] < 0.0 || self.pos[d] > 1.0 {
                self.pos[d] = self.pos[d].clamp(0.0, 1.0);
                self.vel[d] *= -0.5;
            }
        }
        let reward = -self.distance_to_goal();

        self.t += 1;
        if self.t % self.params.goal_interval == 0 {
            self.goal = [self.rng.gen::<f64>(), self.rng.gen::<f64>()];
        }
        Ok(StepResult { reward, next_obs: self.observation() })
    }
}
