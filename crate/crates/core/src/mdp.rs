//! Finite MDPs, stochastic policies and induced Markov chains.
//!
//! Rewards are a deterministic function of the transition `(s, a, s')`, which
//! covers every tabular environment in the crate. States and actions are dense
//! zero-based indices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance used for "sums to one" checks.
pub const PROB_TOL: f64 = 1e-12;

/// A tabular transition and reward model.
///
/// Transition probabilities and rewards are stored densely, indexed
/// `[s][a][s']` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MdpDocument", into = "MdpDocument")]
pub struct FiniteMdp {
    n_states: usize,
    n_actions: usize,
    trans_prob: Vec<f64>,
    reward: Vec<f64>,
}

impl FiniteMdp {
    /// Builds a model from dense `[s][a][s']` tables.
    ///
    /// Only the shape is checked here; use [`validate`] for the probabilistic
    /// invariants.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        trans_prob: Vec<f64>,
        reward: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::Config("an MDP needs at least one state and one action".into()));
        }
        let len = n_states * n_actions * n_states;
        if trans_prob.len() != len || reward.len() != len {
            return Err(Error::Config(format!(
                "expected {len} transition entries, got {} probabilities and {} rewards",
                trans_prob.len(),
                reward.len()
            )));
        }
        Ok(Self { n_states, n_actions, trans_prob, reward })
    }

    /// An all-zero model to be filled with [`FiniteMdp::set`].
    pub fn zeros(n_states: usize, n_actions: usize) -> Result<Self> {
        let len = n_states * n_actions * n_states;
        Self::new(n_states, n_actions, vec![0.0; len], vec![0.0; len])
    }

    /// Builds a model from sparse `(s, a, s', prob, reward)` entries.
    /// Omitted triples have probability zero.
    pub fn from_transitions(
        n_states: usize,
        n_actions: usize,
        transitions: &[(usize, usize, usize, f64, f64)],
    ) -> Result<Self> {
        let mut mdp = Self::zeros(n_states, n_actions)?;
        let mut seen = vec![false; mdp.trans_prob.len()];
        for &(s, a, s2, p, r) in transitions {
            if s >= n_states || a >= n_actions || s2 >= n_states {
                return Err(Error::Config(format!(
                    "transition ({s}, {a}, {s2}) out of range for {n_states} states and {n_actions} actions"
                )));
            }
            let i = mdp.index(s, a, s2);
            if seen[i] {
                return Err(Error::Config(format!("duplicate transition ({s}, {a}, {s2})")));
            }
            seen[i] = true;
            mdp.trans_prob[i] = p;
            mdp.reward[i] = r;
        }
        Ok(mdp)
    }

    #[inline]
    fn index(&self, s: usize, a: usize, s2: usize) -> usize {
        (s * self.n_actions + a) * self.n_states + s2
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn prob(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.trans_prob[self.index(s, a, s2)]
    }

    pub fn reward(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.reward[self.index(s, a, s2)]
    }

    /// Overwrites one transition entry.
    pub fn set(&mut self, s: usize, a: usize, s2: usize, prob: f64, reward: f64) {
        let i = self.index(s, a, s2);
        self.trans_prob[i] = prob;
        self.reward[i] = reward;
    }

    /// Next-state distribution of `(s, a)`.
    pub fn next_state_probs(&self, s: usize, a: usize) -> &[f64] {
        let start = self.index(s, a, 0);
        &self.trans_prob[start..start + self.n_states]
    }

    fn rewards_row(&self, s: usize, a: usize) -> &[f64] {
        let start = self.index(s, a, 0);
        &self.reward[start..start + self.n_states]
    }

    /// Expected one-step reward `r(s, a) = sum_s' p(s'|s,a) r(s,a,s')`.
    pub fn expected_reward(&self, s: usize, a: usize) -> f64 {
        self.next_state_probs(s, a)
            .iter()
            .zip(self.rewards_row(s, a))
            .map(|(p, r)| p * r)
            .sum()
    }

    /// The same model with `c` added to every reward.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.reward.iter_mut().for_each(|r| *r += c);
        out
    }
}

/// The on-disk JSON form of a [`FiniteMdp`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct MdpDocument {
    n_states: usize,
    n_actions: usize,
    transitions: Vec<(usize, usize, usize, f64, f64)>,
}

impl TryFrom<MdpDocument> for FiniteMdp {
    type Error = Error;

    fn try_from(doc: MdpDocument) -> Result<Self> {
        FiniteMdp::from_transitions(doc.n_states, doc.n_actions, &doc.transitions)
    }
}

impl From<FiniteMdp> for MdpDocument {
    fn from(mdp: FiniteMdp) -> Self {
        let mut transitions = Vec::new();
        for s in 0..mdp.n_states {
            for a in 0..mdp.n_actions {
                for s2 in 0..mdp.n_states {
                    let i = mdp.index(s, a, s2);
                    if mdp.trans_prob[i] != 0.0 || mdp.reward[i] != 0.0 {
                        transitions.push((s, a, s2, mdp.trans_prob[i], mdp.reward[i]));
                    }
                }
            }
        }
        MdpDocument { n_states: mdp.n_states, n_actions: mdp.n_actions, transitions }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    ProbabilityRange,
    RowSum,
    FiniteReward,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::ProbabilityRange => "probability range",
            Check::RowSum => "row sum",
            Check::FiniteReward => "finite reward",
        })
    }
}

/// One failed invariant of a [`FiniteMdp`], located at `(state, action)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub state: usize,
    pub action: usize,
    pub check: Check,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(s={}, a={}) {}: {}", self.state, self.action, self.check, self.detail)
    }
}

/// Lists every broken invariant; empty iff the model is well formed.
pub fn validate(mdp: &FiniteMdp) -> Vec<Violation> {
    let mut out = Vec::new();
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            let row = mdp.next_state_probs(s, a);
            for (s2, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    out.push(Violation {
                        state: s,
                        action: a,
                        check: Check::ProbabilityRange,
                        detail: format!("p(s'={s2}) = {p}"),
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if !((sum - 1.0).abs() <= PROB_TOL) {
                out.push(Violation {
                    state: s,
                    action: a,
                    check: Check::RowSum,
                    detail: format!("probabilities sum to {sum}"),
                });
            }
            if let Some(s2) = mdp.rewards_row(s, a).iter().position(|r| !r.is_finite()) {
                out.push(Violation {
                    state: s,
                    action: a,
                    check: Check::FiniteReward,
                    detail: format!("reward to s'={s2} is not finite"),
                });
            }
        }
    }
    out
}

/// A stochastic policy `pi(a|s)`, used both for target and behavior policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolicyDocument", into = "PolicyDocument")]
pub struct PolicyMatrix {
    probs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PolicyDocument {
    probs: Vec<Vec<f64>>,
}

impl TryFrom<PolicyDocument> for PolicyMatrix {
    type Error = Error;

    fn try_from(doc: PolicyDocument) -> Result<Self> {
        PolicyMatrix::new(doc.probs)
    }
}

impl From<PolicyMatrix> for PolicyDocument {
    fn from(p: PolicyMatrix) -> Self {
        PolicyDocument { probs: p.probs }
    }
}

impl PolicyMatrix {
    /// Checks that every row is a probability distribution over the same
    /// number of actions.
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        let n_actions = probs.first().map(Vec::len).unwrap_or(0);
        if n_actions == 0 {
            return Err(Error::Config("policy must have at least one state and one action".into()));
        }
        for (s, row) in probs.iter().enumerate() {
            if row.len() != n_actions {
                return Err(Error::Config(format!(
                    "policy row {s} has {} actions, expected {n_actions}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::Config(format!("policy row {s} has an entry outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::Config(format!("policy row {s} sums to {sum}")));
            }
        }
        Ok(Self { probs })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self { probs: vec![vec![1.0 / n_actions as f64; n_actions]; n_states] }
    }

    /// The same action distribution in every state.
    pub fn state_independent(n_states: usize, action_probs: &[f64]) -> Result<Self> {
        Self::new(vec![action_probs.to_vec(); n_states])
    }

    /// One-hot rows selecting `actions[s]` in state `s`.
    pub fn deterministic(actions: &[usize], n_actions: usize) -> Result<Self> {
        let probs = actions
            .iter()
            .map(|&a| {
                if a >= n_actions {
                    return Err(Error::Config(format!("action {a} out of range")));
                }
                let mut row = vec![0.0; n_actions];
                row[a] = 1.0;
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(probs)
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &PolicyMatrix, lambda: f64) -> Result<Self> {
        if self.n_states() != other.n_states() || self.n_actions() != other.n_actions() {
            return Err(Error::Config("cannot mix policies of different shapes".into()));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| lambda * p + (1.0 - lambda) * q).collect())
            .collect();
        Ok(Self { probs })
    }

    pub fn n_states(&self) -> usize {
        self.probs.len()
    }

    pub fn n_actions(&self) -> usize {
        self.probs[0].len()
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s][a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s]
    }
}

/// The state-to-state chain `P_pi` and expected reward vector `r_pi` of a
/// policy acting in an MDP.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedChain {
    pub p: Vec<Vec<f64>>,
    pub r: Vec<f64>,
}

impl InducedChain {
    /// Builds a chain directly from a transition matrix and reward vector.
    pub fn new(p: Vec<Vec<f64>>, r: Vec<f64>) -> Result<Self> {
        let n = r.len();
        if n == 0 || p.len() != n || p.iter().any(|row| row.len() != n) {
            return Err(Error::Config("chain matrix must be square and match the reward vector".into()));
        }
        for (s, row) in p.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || row.iter().any(|x| *x < 0.0) {
                return Err(Error::Config(format!("chain row {s} is not a distribution")));
            }
        }
        Ok(Self { p, r })
    }

    pub fn n_states(&self) -> usize {
        self.r.len()
    }

    /// The same chain with `c` added to every expected reward.
    pub fn shifted(&self, c: f64) -> Self {
        Self { p: self.p.clone(), r: self.r.iter().map(|r| r + c).collect() }
    }
}

/// Computes `P_pi[s][s'] = sum_a pi(a|s) p(s'|s,a)` and
/// `r_pi[s] = sum_a pi(a|s) sum_s' p(s'|s,a) r(s,a,s')`.
pub fn induce_chain(mdp: &FiniteMdp, policy: &PolicyMatrix) -> Result<InducedChain> {
    if policy.n_states() != mdp.n_states || policy.n_actions() != mdp.n_actions {
        return Err(Error::Config(format!(
            "policy is {}x{} but the MDP has {} states and {} actions",
            policy.n_states(),
            policy.n_actions(),
            mdp.n_states,
            mdp.n_actions
        )));
    }
    let n = mdp.n_states;
    let mut p = vec![vec![0.0; n]; n];
    let mut r = vec![0.0; n];
    for s in 0..n {
        for a in 0..mdp.n_actions {
            let w = policy.prob(s, a);
            if w == 0.0 {
                continue;
            }
            for (s2, &q) in mdp.next_state_probs(s, a).iter().enumerate() {
                p[s][s2] += w * q;
            }
            r[s] += w * mdp.expected_reward(s, a);
        }
    }
    Ok(InducedChain { p, r })
}
