use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{AgentConfig, ControlConfig, ExperimentConfig, FeatureSpec, PredictionConfig, RmsveWeighting};
use crate::agents::{PredictionAgent, QAgent};
use crate::envs::{make_env, shift_rewards, Environment, Observation, ObservationSpace, ShiftRewards};
use crate::features::{one_hot, tile_encode, SparseFeatures, TileCoderConfig};
use crate::mdp::induce_chain;
use crate::solver;
use crate::{Error, Result};

/// Stream tag for environment dynamics.
pub const ENV_STREAM: u64 = 0x656e76;
/// Stream tag for the agent's action choices.
pub const AGENT_STREAM: u64 = 0x6167656e74;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one random stream of one run of one sweep cell.
pub fn mix_seed(base_seed: u64, cell: u64, run: u64, stream: u64) -> u64 {
    let mut h = splitmix64(base_seed);
    for word in [cell, run, stream] {
        h = splitmix64(h ^ word);
    }
    h
}

/// Seeds for the environment and the agent of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSeeds {
    pub env: u64,
    pub agent: u64,
}

impl RunSeeds {
    pub fn derive(base_seed: u64, cell: usize, run: usize) -> Self {
        Self {
            env: mix_seed(base_seed, cell as u64, run as u64, ENV_STREAM),
            agent: mix_seed(base_seed, cell as u64, run as u64, AGENT_STREAM),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Rmsve,
    /// Mean reward over the bin ending at the recorded step, shift removed.
    RewardBinAvg,
    Rbar,
    /// Mean of `max_a Q` over the states visited in the final 10% of steps.
    MaxQVisited,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Rmsve, Metric::RewardBinAvg, Metric::Rbar, Metric::MaxQVisited];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Rmsve => "rmsve",
            Metric::RewardBinAvg => "reward_bin_avg",
            Metric::Rbar => "rbar",
            Metric::MaxQVisited => "max_q_visited",
        }
    }

    pub fn parse(name: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub step: u64,
    pub metric: Metric,
    pub value: f64,
}

/// The measurements of one run, in recording order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub run: usize,
    pub records: Vec<Record>,
}

impl RunLog {
    fn new(run: usize) -> Self {
        Self { run, records: Vec::new() }
    }

    fn push(&mut self, step: u64, metric: Metric, value: f64) {
        self.records.push(Record { step, metric, value });
    }

    /// `(step, value)` pairs for one metric.
    pub fn series(&self, metric: Metric) -> Vec<(u64, f64)> {
        self.records.iter().filter(|r| r.metric == metric).map(|r| (r.step, r.value)).collect()
    }

    fn values(&self, metric: Metric) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().filter(move |r| r.metric == metric).map(|r| r.value)
    }

    /// Training-average reward: bin averages weighted by bin width. Bins
    /// are contiguous from step 0, so each width is the step difference.
    pub fn training_average_reward(&self) -> Option<f64> {
        let mut prev = 0;
        let mut total = 0.0;
        for (step, value) in self.series(Metric::RewardBinAvg) {
            total += value * (step - prev) as f64;
            prev = step;
        }
        (prev > 0).then(|| total / prev as f64)
    }

    /// Mean RMSVE over the last tenth of its samples (at least one).
    pub fn final_rmsve(&self) -> Option<f64> {
        let v: Vec<f64> = self.values(Metric::Rmsve).collect();
        if v.is_empty() {
            return None;
        }
        let tail = &v[v.len() - (v.len() / 10).max(1)..];
        Some(tail.iter().sum::<f64>() / tail.len() as f64)
    }

    pub fn final_rbar(&self) -> Option<f64> {
        self.values(Metric::Rbar).last()
    }

    pub fn max_q_visited(&self) -> Option<f64> {
        self.values(Metric::MaxQVisited).last()
    }
}

/// `sqrt(sum_s w_s (est_s - target_s)^2)`.
pub fn rmsve(estimates: &[f64], targets: &[f64], weights: &[f64]) -> Result<f64> {
    if estimates.len() != targets.len() || estimates.len() != weights.len() {
        return Err(Error::Usage(format!(
            "rmsve needs equal lengths, got {}, {} and {}",
            estimates.len(),
            targets.len(),
            weights.len()
        )));
    }
    let sum: f64 = estimates
        .iter()
        .zip(targets)
        .zip(weights)
        .map(|((e, t), w)| w * (e - t) * (e - t))
        .sum();
    Ok(sum.sqrt())
}

pub fn agent_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds the (shifted) environment of a run.
pub fn build_env(cfg: &ExperimentConfig, seed: u64) -> Result<ShiftRewards<Box<dyn Environment>>> {
    Ok(shift_rewards(make_env(&cfg.env, seed)?, cfg.shift))
}

/// Runs one run of either agent kind.
pub fn run_experiment(cfg: &ExperimentConfig, seeds: RunSeeds, run: usize) -> Result<RunLog> {
    cfg.validate()?;
    match &cfg.agent {
        AgentConfig::Prediction(p) => run_prediction(cfg, p, seeds, run),
        AgentConfig::Control(c) => run_control(cfg, c, seeds, run),
    }
}

fn discrete_state(obs: &Observation) -> Result<usize> {
    obs.as_discrete()
        .ok_or_else(|| Error::Config("tabular agents need a discrete observation space".into()))
}

struct RewardBins {
    width: u64,
    shift: f64,
    sum: f64,
}

impl RewardBins {
    /// Adds the reward of step `t` (1-based) and closes the bin if it ends.
    fn add(&mut self, t: u64, reward: f64, log: &mut RunLog, rbar: f64) {
        self.sum += reward - self.shift;
        if t % self.width == 0 {
            log.push(t, Metric::RewardBinAvg, self.sum / self.width as f64);
            log.push(t, Metric::Rbar, rbar);
            self.sum = 0.0;
        }
    }
}

/// TD prediction under a behavior policy on an environment with an exact
/// model. RMSVE is measured against the centered discounted values for the
/// centered modes and the discounted values otherwise.
pub fn run_prediction(cfg: &ExperimentConfig, p: &PredictionConfig, seeds: RunSeeds, run: usize) -> Result<RunLog> {
    let mut env = build_env(cfg, seeds.env)?;
    let mdp = env.as_finite_mdp().map_err(|e| match e {
        Error::Unsupported(msg) => Error::Config(format!("prediction needs an exact model: {msg}")),
        other => other,
    })?;
    let (n_states, n_actions) = (mdp.n_states(), mdp.n_actions());
    let target = p.target_policy.to_matrix(n_states, n_actions)?;
    let behavior = match &p.behavior_policy {
        Some(b) => b.to_matrix(n_states, n_actions)?,
        None => target.clone(),
    };
    for s in 0..n_states {
        for a in 0..n_actions {
            if target.prob(s, a) > 0.0 && behavior.prob(s, a) == 0.0 {
                return Err(Error::Coverage { state: s, action: a });
            }
        }
    }

    let chain = induce_chain(&mdp, &target)?;
    let d_pi = solver::stationary_distribution(&chain)?;
    let rate: f64 = d_pi.iter().zip(&chain.r).map(|(d, r)| d * r).sum();
    let mode = p.mode(rate);
    let targets = if mode.is_centered() {
        solver::centered_discounted_values(&chain, p.gamma)?
    } else {
        solver::discounted_values(&chain, p.gamma)?
    };
    let weights = match cfg.rmsve_weighting {
        RmsveWeighting::Uniform => vec![1.0 / n_states as f64; n_states],
        RmsveWeighting::OnPolicy => d_pi,
    };
    let samplers = (0..n_states)
        .map(|s| WeightedIndex::new(behavior.row(s)).map_err(|e| Error::Config(format!("behavior row {s}: {e}"))))
        .collect::<Result<Vec<_>>>()?;

    let mut agent = PredictionAgent::new(n_states, mode, p.gamma, p.alpha, p.eta, p.optimizations)?
        .with_initial_rbar(p.rbar_init);
    let mut rng = agent_rng(seeds.agent);
    let mut log = RunLog::new(run);
    let every = cfg.rmsve_every();
    let mut bins = RewardBins { width: cfg.bin_width(), shift: cfg.shift, sum: 0.0 };

    log.push(0, Metric::Rmsve, rmsve(agent.values(), &targets, &weights)?);
    let mut s = discrete_state(&env.observation())?;
    for t in 1..=cfg.total_steps {
        let a = samplers[s].sample(&mut rng);
        let out = env.step(a)?;
        let s_next = discrete_state(&out.next_obs)?;
        let rho = target.prob(s, a) / behavior.prob(s, a);
        agent.step(s, s_next, out.reward, rho);
        s = s_next;
        bins.add(t, out.reward, &mut log, agent.rbar());
        if t % every == 0 {
            log.push(t, Metric::Rmsve, rmsve(agent.values(), &targets, &weights)?);
        }
    }
    Ok(log)
}

/// Turns observations into sparse features for a control agent.
pub enum Featurizer {
    Tabular { n_states: usize },
    Tile(TileCoderConfig),
}

impl Featurizer {
    pub fn new(spec: &FeatureSpec, space: &ObservationSpace) -> Result<Self> {
        match (spec, space) {
            (FeatureSpec::Tabular, ObservationSpace::Discrete { n_states }) => {
                Ok(Featurizer::Tabular { n_states: *n_states })
            }
            (FeatureSpec::Tile { n_tilings, tiles_per_dim }, ObservationSpace::Real { ranges }) => {
                Ok(Featurizer::Tile(TileCoderConfig::new(*n_tilings, tiles_per_dim.clone(), ranges.clone())?))
            }
            (FeatureSpec::Tabular, _) => Err(Error::Config("tabular features need discrete observations".into())),
            (FeatureSpec::Tile { .. }, _) => Err(Error::Config("tile coding needs real-valued observations".into())),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Featurizer::Tabular { n_states } => *n_states,
            Featurizer::Tile(cfg) => cfg.total_dim(),
        }
    }

    pub fn encode(&self, obs: &Observation) -> Result<SparseFeatures> {
        match (self, obs) {
            (Featurizer::Tabular { n_states }, Observation::Discrete(s)) => one_hot(*s, *n_states),
            (Featurizer::Tile(cfg), Observation::Real(x)) => tile_encode(cfg, x),
            _ => Err(Error::Usage("observation does not match the feature encoder".into())),
        }
    }
}

/// Epsilon-greedy Q-learning. Logs binned rewards with the shift removed,
/// the estimate at each bin end, and the mean greedy value of the states
/// visited in the final 10% of steps.
pub fn run_control(cfg: &ExperimentConfig, c: &ControlConfig, seeds: RunSeeds, run: usize) -> Result<RunLog> {
    let mut env = build_env(cfg, seeds.env)?;
    let desc = env.descriptor().clone();
    let features = Featurizer::new(&c.features, &desc.observation)?;
    let mut agent = QAgent::new(desc.n_actions, features.dim(), c.gamma, c.alpha, c.eta, c.epsilon, c.optimizations)?
        .with_initial_rbar(c.rbar_init);
    let mut rng = agent_rng(seeds.agent);
    let mut log = RunLog::new(run);
    let mut bins = RewardBins { width: cfg.bin_width(), shift: cfg.shift, sum: 0.0 };
    let tail_start = cfg.total_steps - cfg.total_steps / 10;
    let (mut tail_sum, mut tail_count) = (0.0, 0u64);

    let mut x = features.encode(&env.observation())?;
    for t in 1..=cfg.total_steps {
        if t > tail_start {
            tail_sum += agent.max_action_value(&x);
            tail_count += 1;
        }
        let a = agent.select_action(&x, &mut rng);
        let out = env.step(a)?;
        let x_next = features.encode(&out.next_obs)?;
        agent.step(&x, a, out.reward, &x_next);
        x = x_next;
        bins.add(t, out.reward, &mut log, agent.rbar());
    }
    if tail_count > 0 {
        log.push(cfg.total_steps, Metric::MaxQVisited, tail_sum / tail_count as f64);
    }
    Ok(log)
}
