use super::{EnvDescriptor, Environment, Observation, StepResult};
use crate::mdp::FiniteMdp;
use crate::Result;

/// Adds a constant to every reward of the wrapped environment. Dynamics and
/// the random stream are untouched.
#[derive(Debug, Clone)]
pub struct ShiftRewards<E> {
    inner: E,
    shift: f64,
}

impl<E: Environment> ShiftRewards<E> {
    pub fn new(inner: E, shift: f64) -> Self {
        Self { inner, shift }
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn into_inner(self) -> E {
        self.inner
    }
}

pub fn shift_rewards<E: Environment>(env: E, c: f64) -> ShiftRewards<E> {
    ShiftRewards::new(env, c)
}

impl<E: Environment> Environment for ShiftRewards<E> {
    fn descriptor(&self) -> &EnvDescriptor {
        self.inner.descriptor()
    }

    fn observation(&self) -> Observation {
        self.inner.observation()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        let mut out = self.inner.step(action)?;
        out.reward += self.shift;
        Ok(out)
    }

    fn as_finite_mdp(&self) -> Result<FiniteMdp> {
        Ok(self.inner.as_finite_mdp()?.shifted(self.shift))
    }
}
