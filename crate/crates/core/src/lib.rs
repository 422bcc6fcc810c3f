//! Reward centering for discounted reinforcement learning.
//!
//! The crate is organised bottom-up:
//!
//! - [`mdp`]: finite MDPs, stochastic policies and the Markov chain a policy induces.
//! - [`solver`]: exact dynamic-programming quantities (average reward, discounted,
//!   differential and centered values, optimal action values, the fixed point of
//!   centered Q-learning).
//! - [`envs`]: seedable continuing environments and the reward-shift wrapper.
//! - [`features`]: one-hot and tile-coding encoders.
//! - [`agents`]: TD prediction with four centering modes and Q-learning with
//!   value-based centering.
//! - [`harness`]: config-driven runs, sweeps, metrics and CSV output.

pub mod agents;
pub mod envs;
mod error;
pub mod features;
pub mod harness;
mod linalg;
pub mod mdp;
pub mod solver;

pub use error::{Error, Result};
