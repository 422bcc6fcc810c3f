use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_action, env_rng, EnvDescriptor, EnvRng, Environment, Observation, ObservationSpace, StepResult};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatchParams {
    pub rows: usize,
    pub cols: usize,
    /// A new fruit appears in the top row every this many steps.
    pub spawn_interval: usize,
}

impl Default for CatchParams {
    fn default() -> Self {
        Self { rows: 10, cols: 5, spawn_interval: 5 }
    }
}

/// A fruit at `(col, row)`; row 0 is the top.
pub type Fruit = (usize, usize);

/// Continuing Catch with a 3-D real observation.
///
/// A paddle in the bottom row moves left (0), stays (1) or moves right (2).
/// Fruits fall one row per step; a fruit reaching the bottom row pays +1 if
/// the paddle is under it and -1 otherwise, then disappears. The observation
/// is the paddle column and the lowermost fruit's `(col, row)`, each scaled
/// to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Catch {
    params: CatchParams,
    desc: EnvDescriptor,
    paddle: usize,
    /// Oldest (lowest) fruit first.
    fruits: Vec<Fruit>,
    t: u64,
    catches: u64,
    drops: u64,
    rng: EnvRng,
}

impl Catch {
    pub const LEFT: usize = 0;
    pub const STAY: usize = 1;
    pub const RIGHT: usize = 2;

    pub fn new(params: CatchParams, seed: u64) -> Result<Self> {
        if params.rows < 2 || params.cols < 2 || params.spawn_interval == 0 {
            return Err(Error::Config(
                "catch needs at least 2 rows, 2 columns and a positive spawn interval".into(),
            ));
        }
        let desc = EnvDescriptor {
            name: "catch".into(),
            n_actions: 3,
            observation: ObservationSpace::Real { ranges: vec![(0.0, 1.0); 3] },
            has_exact_mdp: false,
        };
        let paddle = params.cols / 2;
        let mut env = Self {
            params,
            desc,
            paddle,
            fruits: Vec::new(),
            t: 0,
            catches: 0,
            drops: 0,
            rng: env_rng(seed),
        };
        env.spawn();
        Ok(env)
    }

    /// Starts from an explicit layout with the spawn clock at `t`.
    pub fn with_layout(params: CatchParams, seed: u64, paddle: usize, fruits: Vec<Fruit>, t: u64) -> Result<Self> {
        let mut env = Self::new(params, seed)?;
        if paddle >= env.params.cols
            || fruits.iter().any(|&(c, r)| c >= env.params.cols || r >= env.params.rows)
        {
            return Err(Error::Config("catch layout out of bounds".into()));
        }
        env.paddle = paddle;
        env.fruits = fruits;
        env.fruits.sort_by(|a, b| b.1.cmp(&a.1));
        env.t = t;
        Ok(env)
    }

    fn spawn(&mut self) {
        let col = self.rng.gen_range(0..self.params.cols);
        self.fruits.push((col, 0));
    }

    pub fn catches(&self) -> u64 {
        self.catches
    }

    pub fn drops(&self) -> u64 {
        self.drops
    }

    pub fn paddle(&self) -> usize {
        self.paddle
    }

    pub fn fruits(&self) -> &[Fruit] {
        &self.fruits
    }
}

impl Environment for Catch {
    fn descriptor(&self) -> &EnvDescriptor {
        &self.desc
    }

    fn observation(&self) -> Observation {
        let x_scale = (self.params.cols - 1) as f64;
        let y_scale = (self.params.rows - 1) as f64;
        let (fx, fy) = match self.fruits.iter().max_by_key(|f| f.1) {
            Some(&(c, r)) => (c as f64 / x_scale, r as f64 / y_scale),
            None => (0.5, 0.0),
        };
        Observation::Real(vec![self.paddle as f64 / x_scale, fx, fy])
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        check_action(&self.desc, action)?;
        self.paddle = match action {
            Self::LEFT => self.paddle.saturating_sub(1),
            Self::RIGHT => (self.paddle + 1).min(self.params.cols - 1),
            _ => self.paddle,
        };

        let bottom = self.params.rows - 1;
        let mut reward = 0.0;
        let paddle = self.paddle;
        let (mut catches, mut drops) = (0, 0);
        self.fruits.retain_mut(|f| {
            f.1 += 1;
            if f.1 < bottom {
                return true;
            }
            if f.0 == paddle {
                catches += 1;
                reward += 1.0;
            } else {
                drops += 1;
                reward -= 1.0;
            }
            false
        });
        self.catches += catches;
        self.drops += drops;

        self.t += 1;
        if self.t % self.params.spawn_interval as u64 == 0 {
            self.spawn();
        }
        Ok(StepResult { reward, next_obs: self.observation() })
    }
}
