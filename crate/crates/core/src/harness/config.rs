use serde::{Deserialize, Serialize};

use crate::agents::{CenteringMode, Optimizations, StepSizeSchedule};
use crate::envs::EnvConfig;
use crate::mdp::PolicyMatrix;
use crate::{Error, Result};

/// One experiment cell: an environment, an agent and a measurement plan,
/// repeated for `n_runs` independent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    /// Constant added to every reward the agent sees.
    #[serde(default)]
    pub shift: f64,
    pub agent: AgentConfig,
    pub total_steps: u64,
    pub n_runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Width of the reward-averaging bins; `total_steps / 100` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_width: Option<u64>,
    /// RMSVE sampling interval for prediction runs; the bin width when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmsve_every: Option<u64>,
    #[serde(default)]
    pub rmsve_weighting: RmsveWeighting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RmsveWeighting {
    #[default]
    Uniform,
    /// The target policy's stationary distribution.
    OnPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentConfig {
    Prediction(PredictionConfig),
    Control(ControlConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    None,
    Oracle,
    Simple,
    ValueBased,
}

fn optimizations_on() -> Optimizations {
    Optimizations::ON
}

fn default_epsilon() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionConfig {
    pub centering: Centering,
    /// Known average reward for oracle centering; the exact rate of the
    /// target policy when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_rbar: Option<f64>,
    pub gamma: f64,
    pub alpha: StepSizeSchedule,
    #[serde(default)]
    pub eta: f64,
    pub target_policy: PolicySpec,
    /// Defaults to the target policy (on-policy).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior_policy: Option<PolicySpec>,
    #[serde(default = "optimizations_on")]
    pub optimizations: Optimizations,
    #[serde(default)]
    pub rbar_init: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    pub gamma: f64,
    pub alpha: StepSizeSchedule,
    /// Zero gives standard Q-learning.
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub features: FeatureSpec,
    #[serde(default = "optimizations_on")]
    pub optimizations: Optimizations,
    #[serde(default)]
    pub rbar_init: f64,
}

/// A policy given either as one action distribution shared by every state
/// or as a full per-state matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicySpec {
    Shared(Vec<f64>),
    PerState(Vec<Vec<f64>>),
}

impl PolicySpec {
    pub fn to_matrix(&self, n_states: usize, n_actions: usize) -> Result<PolicyMatrix> {
        let m = match self {
            PolicySpec::Shared(row) => PolicyMatrix::state_independent(n_states, row)?,
            PolicySpec::PerState(rows) => PolicyMatrix::new(rows.clone())?,
        };
        if m.n_states() != n_states || m.n_actions() != n_actions {
            return Err(Error::Config(format!(
                "policy is {}x{}, environment has {n_states} states and {n_actions} actions",
                m.n_states(),
                m.n_actions()
            )));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureSpec {
    /// One-hot states; needs a discrete observation space.
    #[default]
    Tabular,
    /// Tile coding over the environment's declared observation ranges.
    Tile { n_tilings: usize, tiles_per_dim: Vec<usize> },
}

impl AgentConfig {
    pub fn gamma(&self) -> f64 {
        match self {
            AgentConfig::Prediction(p) => p.gamma,
            AgentConfig::Control(c) => c.gamma,
        }
    }

    pub fn alpha(&self) -> &StepSizeSchedule {
        match self {
            AgentConfig::Prediction(p) => &p.alpha,
            AgentConfig::Control(c) => &c.alpha,
        }
    }

    pub fn eta(&self) -> f64 {
        match self {
            AgentConfig::Prediction(p) => p.eta,
            AgentConfig::Control(c) => c.eta,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AgentConfig::Prediction(_) => "prediction",
            AgentConfig::Control(_) => "control",
        }
    }

    /// Centering label; control agents are centered exactly when `eta > 0`.
    pub fn centering_label(&self) -> &'static str {
        match self {
            AgentConfig::Prediction(p) => match p.centering {
                Centering::None => "none",
                Centering::Oracle => "oracle",
                Centering::Simple => "simple",
                Centering::ValueBased => "value_based",
            },
            AgentConfig::Control(c) if c.eta > 0.0 => "value_based",
            AgentConfig::Control(_) => "none",
        }
    }
}

impl PredictionConfig {
    /// The agent's centering mode given the exact target rate, which is
    /// used only by oracle centering without an explicit value.
    pub fn mode(&self, exact_rate: f64) -> CenteringMode {
        match self.centering {
            Centering::None => CenteringMode::None,
            Centering::Oracle => CenteringMode::Oracle(self.oracle_rbar.unwrap_or(exact_rate)),
            Centering::Simple => CenteringMode::Simple,
            Centering::ValueBased => CenteringMode::ValueBased,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn bin_width(&self) -> u64 {
        self.bin_width.unwrap_or(self.total_steps / 100).max(1)
    }

    pub fn rmsve_every(&self) -> u64 {
        self.rmsve_every.unwrap_or_else(|| self.bin_width())
    }

    /// Checks everything that does not need the environment built.
    pub fn validate(&self) -> Result<()> {
        if self.total_steps == 0 || self.n_runs == 0 {
            return Err(Error::Config("total_steps and n_runs must be positive".into()));
        }
        let bin = self.bin_width();
        if self.bin_width == Some(0) || self.total_steps % bin != 0 {
            return Err(Error::Config(format!(
                "bin width {bin} must be positive and divide total_steps {}",
                self.total_steps
            )));
        }
        if self.rmsve_every == Some(0) {
            return Err(Error::Config("rmsve_every must be positive".into()));
        }
        if !self.shift.is_finite() {
            return Err(Error::Config("shift must be finite".into()));
        }
        self.agent.alpha().validate()?;
        let gamma = self.agent.gamma();
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!("gamma {gamma} outside [0, 1]")));
        }
        if !(self.agent.eta() >= 0.0) {
            return Err(Error::Config("eta must be non-negative".into()));
        }
        match &self.agent {
            AgentConfig::Prediction(p) => {
                if p.centering == Centering::None && gamma == 1.0 {
                    return Err(Error::Config("uncentered prediction needs gamma < 1".into()));
                }
            }
            AgentConfig::Control(c) => {
                if !(0.0..=1.0).contains(&c.epsilon) {
                    return Err(Error::Config(format!("epsilon {} outside [0, 1]", c.epsilon)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_control_config_gets_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"env": {"name": "access_control"},
                "agent": {"kind": "control", "gamma": 0.99, "alpha": {"constant": 0.1}, "eta": 0.0625},
                "total_steps": 1000, "n_runs": 2}"#,
        )
        .unwrap();
        assert_eq!(cfg.bin_width(), 10);
        assert_eq!(cfg.shift, 0.0);
        let AgentConfig::Control(c) = &cfg.agent else { panic!() };
        assert_eq!(c.epsilon, 0.1);
        assert_eq!(c.features, FeatureSpec::Tabular);
        assert_eq!(c.optimizations, Optimizations::ON);
        assert_eq!(cfg.agent.centering_label(), "value_based");
    }

    #[test]
    fn prediction_config_with_policies() {
        let cfg = ExperimentConfig::from_json(
            r#"{"env": {"name": "random_walk_7"}, "shift": -1.5,
                "agent": {"kind": "prediction", "centering": "oracle", "gamma": 0.9,
                          "alpha": {"exp_decay": {"alpha0": 0.04, "factor": 0.99999}},
                          "target_policy": [0.5, 0.5], "behavior_policy": [0.3, 0.7]},
                "total_steps": 500, "n_runs": 1, "bin_width": 50, "rmsve_weighting": "on_policy"}"#,
        )
        .unwrap();
        let AgentConfig::Prediction(p) = &cfg.agent else { panic!() };
        assert_eq!(p.mode(0.25), CenteringMode::Oracle(0.25));
        let b = p.behavior_policy.as_ref().unwrap().to_matrix(7, 2).unwrap();
        assert_eq!(b.prob(4, 1), 0.7);
        assert_eq!(cfg.rmsve_every(), 50);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = r#"{"env": {"name": "access_control"},
            "agent": {"kind": "control", "gamma": 0.9, "alpha": {"constant": 0.1}},
            "total_steps": 1000, "n_runs": 1"#;
        for tail in [r#", "bin_width": 300}"#, r#", "bin_width": 0}"#, r#", "typo": 1}"#] {
            let err = ExperimentConfig::from_json(&format!("{base}{tail}")).unwrap_err();
            assert!(err.is_config(), "{tail}: {err}");
        }
        assert!(ExperimentConfig::from_json(&format!("{}}}", base.replace("1000", "0"))).is_err());
        let shape = PolicySpec::PerState(vec![vec![1.0, 0.0]; 3]);
        assert!(shape.to_matrix(7, 2).unwrap_err().is_config());
    }
}
