//! Exact dynamic-programming quantities for finite MDPs.
//!
//! Everything here is a pure function of an [`InducedChain`] or a
//! [`FiniteMdp`]; the learning agents are measured against these values.
//!
//! For a policy with average reward `r`, the discounted values decompose as
//! `v_gamma = r / (1 - gamma) + v_centered` and
//! `v_centered = v_diff + laurent_error`, where the error term vanishes as
//! `gamma -> 1`.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, max_abs_diff, Singular};
use crate::mdp::{induce_chain, FiniteMdp, InducedChain, PolicyMatrix};
use crate::{Error, Result};

/// Stop threshold for value iteration.
pub const VI_TOL: f64 = 1e-12;
/// Hard cap on value-iteration sweeps.
pub const VI_MAX_SWEEPS: usize = 1_000_000;

/// Exact quantities for one policy and discount factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueReport {
    pub gamma: f64,
    pub avg_reward: f64,
    pub d_pi: Vec<f64>,
    /// Standard discounted values; absent when `gamma == 1`.
    pub v_gamma: Option<Vec<f64>>,
    pub v_diff: Vec<f64>,
    pub v_centered: Vec<f64>,
    pub laurent_error: Vec<f64>,
}

/// Predicted limit of tabular Q-learning with value-based centering, seen as
/// relative Q-learning with a uniform weighting and gain `eta |S||A|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointPrediction {
    pub q_star: Vec<Vec<f64>>,
    pub q_tilde_inf: Vec<Vec<f64>>,
    pub rbar_inf: f64,
    pub eta: f64,
    pub gamma: f64,
}

fn check_discount(gamma: f64) -> Result<()> {
    if (0.0..1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::Domain(format!("discount factor must be in [0, 1), got {gamma}")))
    }
}

fn reachable(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(s) = stack.pop() {
        for t in 0..n {
            if !seen[t] && edge(s, t) {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    seen
}

/// Fails with [`Error::NotErgodic`] unless the nonzero-probability graph of
/// the chain is strongly connected.
pub fn check_irreducible(chain: &InducedChain) -> Result<()> {
    let n = chain.n_states();
    let forward = reachable(n, |s, t| chain.p[s][t] > 0.0);
    let backward = reachable(n, |s, t| chain.p[t][s] > 0.0);
    match forward.iter().zip(&backward).position(|(f, b)| !(*f && *b)) {
        None => Ok(()),
        Some(s) => Err(Error::NotErgodic(format!(
            "state {s} is not mutually reachable with state 0"
        ))),
    }
}

fn not_ergodic(e: Singular) -> Error {
    Error::NotErgodic(format!(
        "singular balance equations (column {}, pivot {:e})",
        e.column, e.pivot
    ))
}

/// The stationary distribution `d` with `d P = d`, `sum d = 1`.
///
/// Solved directly: the last balance equation is replaced by the
/// normalisation row.
pub fn stationary_distribution(chain: &InducedChain) -> Result<Vec<f64>> {
    check_irreducible(chain)?;
    let n = chain.n_states();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| chain.p[j][i] - if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    a[n - 1] = vec![1.0; n];
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let d = linalg::solve(a, b).map_err(not_ergodic)?;
    if let Some(s) = d.iter().position(|x| *x <= 0.0) {
        return Err(Error::NotErgodic(format!("stationary mass of state {s} is {}", d[s])));
    }
    Ok(d)
}

/// `r(pi) = d_pi . r_pi`.
pub fn average_reward(chain: &InducedChain) -> Result<f64> {
    let d = stationary_distribution(chain)?;
    Ok(linalg::dot(&d, &chain.r))
}

fn residual_ok(residual: f64, scale: f64) -> bool {
    residual <= 1e-9 * scale.max(1.0)
}

/// Solves `(I - gamma P) v = rhs`.
fn discounted_solve(chain: &InducedChain, gamma: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    check_discount(gamma)?;
    let n = chain.n_states();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { 0.0 } - gamma * chain.p[i][j])
                .collect()
        })
        .collect();
    let v = linalg::solve(a, rhs.to_vec())
        .map_err(|e| Error::Domain(format!("(I - gamma P) is singular at column {}", e.column)))?;
    let pv = linalg::mat_vec(&chain.p, &v);
    let residual = (0..n)
        .map(|s| (v[s] - rhs[s] - gamma * pv[s]).abs())
        .fold(0.0, f64::max);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !residual_ok(residual, scale) {
        return Err(Error::Domain(format!("discounted solve residual {residual:e} too large")));
    }
    Ok(v)
}

/// Standard discounted values `v = (I - gamma P)^-1 r`.
pub fn discounted_values(chain: &InducedChain, gamma: f64) -> Result<Vec<f64>> {
    discounted_solve(chain, gamma, &chain.r)
}

/// Differential values: `(I - P) v = r - r(pi) 1` with `d_pi . v = 0`.
pub fn differential_values(chain: &InducedChain) -> Result<Vec<f64>> {
    let d = stationary_distribution(chain)?;
    let rate = linalg::dot(&d, &chain.r);
    let n = chain.n_states();
    // The balance rows are dependent with positive weights d, so any one of
    // them can be swapped for the normalisation constraint.
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - chain.p[i][j]).collect())
        .collect();
    let mut b: Vec<f64> = chain.r.iter().map(|r| r - rate).collect();
    a[n - 1] = d.clone();
    b[n - 1] = 0.0;
    let v = linalg::solve(a, b).map_err(not_ergodic)?;

    let pv = linalg::mat_vec(&chain.p, &v);
    let residual = (0..n)
        .map(|s| (v[s] - (chain.r[s] - rate + pv[s])).abs())
        .fold(0.0, f64::max);
    if !residual_ok(residual, 1.0) {
        return Err(Error::NotErgodic(format!("differential solve residual {residual:e}")));
    }
    Ok(v)
}

/// Centered discounted values `v_gamma - r(pi) / (1 - gamma)`; at
/// `gamma == 1` these are the differential values.
pub fn centered_discounted_values(chain: &InducedChain, gamma: f64) -> Result<Vec<f64>> {
    if gamma == 1.0 {
        return differential_values(chain);
    }
    let rate = average_reward(chain)?;
    let v = discounted_values(chain, gamma)?;
    let offset = rate / (1.0 - gamma);
    Ok(v.into_iter().map(|x| x - offset).collect())
}

/// The Laurent-series error term `v_centered - v_diff`.
pub fn laurent_error(chain: &InducedChain, gamma: f64) -> Result<Vec<f64>> {
    let centered = centered_discounted_values(chain, gamma)?;
    let diff = differential_values(chain)?;
    Ok(centered.iter().zip(&diff).map(|(c, d)| c - d).collect())
}

/// All exact quantities for one `(policy, gamma)`; `gamma` may be 1.
pub fn value_report(chain: &InducedChain, gamma: f64) -> Result<ValueReport> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("discount factor must be in [0, 1], got {gamma}")));
    }
    let d_pi = stationary_distribution(chain)?;
    let avg_reward = linalg::dot(&d_pi, &chain.r);
    let v_diff = differential_values(chain)?;
    let (v_gamma, v_centered) = if gamma < 1.0 {
        let v = discounted_values(chain, gamma)?;
        let offset = avg_reward / (1.0 - gamma);
        let centered = v.iter().map(|x| x - offset).collect();
        (Some(v), centered)
    } else {
        (None, v_diff.clone())
    };
    let laurent_error = v_centered.iter().zip(&v_diff).map(|(c, d)| c - d).collect();
    Ok(ValueReport { gamma, avg_reward, d_pi, v_gamma, v_diff, v_centered, laurent_error })
}

/// `max_s |v(s) - (r_pi(s) - rbar + gamma (P v)(s))|`.
pub fn centered_bellman_residual(chain: &InducedChain, v_hat: &[f64], rbar: f64, gamma: f64) -> f64 {
    let pv = linalg::mat_vec(&chain.p, v_hat);
    (0..chain.n_states())
        .map(|s| (v_hat[s] - (chain.r[s] - rbar + gamma * pv[s])).abs())
        .fold(0.0, f64::max)
}

/// Values learned with the average-reward estimate frozen at `rbar`:
/// the solution of `v = r_pi - rbar 1 + gamma P v`.
pub fn fixed_rbar_solution(chain: &InducedChain, gamma: f64, rbar: f64) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = chain.r.iter().map(|r| r - rbar).collect();
    discounted_solve(chain, gamma, &rhs)
}

fn q_backup(mdp: &FiniteMdp, gamma: f64, rbar: f64, q: &[Vec<f64>], s: usize, a: usize) -> f64 {
    let bootstrap: f64 = mdp
        .next_state_probs(s, a)
        .iter()
        .enumerate()
        .filter(|(_, p)| **p != 0.0)
        .map(|(s2, p)| p * q[s2].iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum();
    mdp.expected_reward(s, a) - rbar + gamma * bootstrap
}

/// Solves `q(s,a) = r(s,a) - rbar + gamma sum_s' p(s'|s,a) max_a' q(s',a')`
/// by value iteration. With `rbar = 0` this is the optimal action-value
/// function `q*`.
pub fn optimal_discounted_q(mdp: &FiniteMdp, gamma: f64, rbar: f64) -> Result<Vec<Vec<f64>>> {
    check_discount(gamma)?;
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    let mut q = vec![vec![0.0; m]; n];
    let mut last_change = f64::INFINITY;
    for _ in 0..VI_MAX_SWEEPS {
        let next: Vec<Vec<f64>> = (0..n)
            .map(|s| (0..m).map(|a| q_backup(mdp, gamma, rbar, &q, s, a)).collect())
            .collect();
        last_change = next
            .iter()
            .zip(&q)
            .map(|(x, y)| max_abs_diff(x, y))
            .fold(0.0, f64::max);
        q = next;
        if last_change < VI_TOL {
            return Ok(q);
        }
    }
    Err(Error::NoConvergence { sweeps: VI_MAX_SWEEPS, last_change })
}

/// `max_{s,a} |q(s,a) - (r(s,a) - rbar + gamma E[max_a' q(s',a')])|`.
pub fn centered_optimality_residual(mdp: &FiniteMdp, q: &[Vec<f64>], rbar: f64, gamma: f64) -> f64 {
    let mut worst = 0.0f64;
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions() {
            worst = worst.max((q[s][a] - q_backup(mdp, gamma, rbar, q, s, a)).abs());
        }
    }
    worst
}

/// The limit `(Q_inf, Rbar_inf)` of tabular Q-learning with value-based
/// centering started from `Q = 0`, `Rbar = 0`:
///
/// `Q_inf = q* - eta / (1 - gamma + eta |S||A|) * sum q*`,
/// `Rbar_inf = eta (1 - gamma) / (1 - gamma + eta |S||A|) * sum q*`.
pub fn relative_q_fixed_point(mdp: &FiniteMdp, gamma: f64, eta: f64) -> Result<FixedPointPrediction> {
    check_discount(gamma)?;
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("eta must be positive, got {eta}")));
    }
    let q_star = optimal_discounted_q(mdp, gamma, 0.0)?;
    let pairs = (mdp.n_states() * mdp.n_actions()) as f64;
    let total: f64 = q_star.iter().flatten().sum();
    let denom = 1.0 - gamma + eta * pairs;
    let offset = eta / denom * total;
    let q_tilde_inf: Vec<Vec<f64>> = q_star
        .iter()
        .map(|row| row.iter().map(|q| q - offset).collect())
        .collect();
    let rbar_inf = eta * (1.0 - gamma) / denom * total;

    let residual = centered_optimality_residual(mdp, &q_tilde_inf, rbar_inf, gamma);
    if residual >= 1e-8 {
        return Err(Error::FixedPoint(residual));
    }
    Ok(FixedPointPrediction { q_star, q_tilde_inf, rbar_inf, eta, gamma })
}

/// Average reward of a chain with a single recurrent class, possibly with
/// transient states. Power iteration on the lazy chain `(P + I) / 2`, which
/// has the same stationary distribution and is aperiodic.
pub fn unichain_rate(chain: &InducedChain) -> Result<f64> {
    if check_irreducible(chain).is_ok() {
        return average_reward(chain);
    }
    let n = chain.n_states();
    let mut d = vec![1.0 / n as f64; n];
    for _ in 0..VI_MAX_SWEEPS {
        let dp = (0..n).map(|j| (0..n).map(|i| d[i] * chain.p[i][j]).sum::<f64>());
        let next: Vec<f64> = dp.zip(&d).map(|(x, y)| 0.5 * (x + y)).collect();
        let change = max_abs_diff(&next, &d);
        d = next;
        if change < VI_TOL {
            return Ok(linalg::dot(&d, &chain.r));
        }
    }
    Err(Error::NotErgodic("no single recurrent class".into()))
}

/// Diagnostic comparison of `Rbar_inf` against the uniform-occupancy rule of
/// thumb `eta |S||A| / (1 - gamma + eta |S||A|) * r(pi*)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleOfThumb {
    /// Average reward of the greedy policy with respect to `q*`.
    pub optimal_rate: f64,
    pub rule_of_thumb_rbar: f64,
    pub rbar_inf: f64,
    /// `rbar_inf / rule_of_thumb_rbar`.
    pub ratio: f64,
}

pub fn rule_of_thumb(mdp: &FiniteMdp, prediction: &FixedPointPrediction) -> Result<RuleOfThumb> {
    let greedy: Vec<usize> = prediction
        .q_star
        .iter()
        .map(|row| argmax(row))
        .collect();
    let policy = PolicyMatrix::deterministic(&greedy, mdp.n_actions())?;
    let optimal_rate = unichain_rate(&induce_chain(mdp, &policy)?)?;
    let kappa = prediction.eta * (mdp.n_states() * mdp.n_actions()) as f64;
    let rule_of_thumb_rbar = kappa / (1.0 - prediction.gamma + kappa) * optimal_rate;
    Ok(RuleOfThumb {
        optimal_rate,
        rule_of_thumb_rbar,
        rbar_inf: prediction.rbar_inf,
        ratio: prediction.rbar_inf / rule_of_thumb_rbar,
    })
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate().skip(1) {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle3() -> InducedChain {
        InducedChain::new(
            vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]],
            vec![3.0, 0.0, 0.0],
        )
        .unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && max_abs_diff(a, b) <= tol
    }

    #[test]
    fn cycle_stationary_and_rate() {
        let d = stationary_distribution(&cycle3()).unwrap();
        assert!(close(&d, &[1.0 / 3.0; 3], 1e-12));
        assert!((average_reward(&cycle3()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_state_stationary() {
        let chain = InducedChain::new(vec![vec![0.9, 0.1], vec![0.5, 0.5]], vec![0.0, 0.0]).unwrap();
        let d = stationary_distribution(&chain).unwrap();
        assert!(close(&d, &[5.0 / 6.0, 1.0 / 6.0], 1e-12));
        assert_eq!(average_reward(&chain).unwrap(), 0.0);
    }

    #[test]
    fn reducible_chain_is_rejected() {
        let chain = InducedChain::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]], vec![1.0, 0.0]).unwrap();
        assert!(matches!(stationary_distribution(&chain), Err(Error::NotErgodic(_))));
        assert!(matches!(differential_values(&chain), Err(Error::NotErgodic(_))));
    }

    #[test]
    fn cycle_values() {
        let chain = cycle3();
        let v = discounted_values(&chain, 0.8).unwrap();
        assert!(close(&v, &[6.15, 3.93, 4.92], 0.005));
        assert!(close(&differential_values(&chain).unwrap(), &[1.0, -1.0, 0.0], 1e-12));
        let c = centered_discounted_values(&chain, 0.8).unwrap();
        assert!(close(&c, &[1.15, -1.07, -0.08], 0.005));
        let e = laurent_error(&chain, 0.8).unwrap();
        assert!((e[0] - 0.15).abs() < 0.01);
    }

    #[test]
    fn gamma_one_gives_differential_values() {
        let chain = cycle3();
        let c = centered_discounted_values(&chain, 1.0).unwrap();
        assert_eq!(c, differential_values(&chain).unwrap());
        assert!(laurent_error(&chain, 1.0).unwrap().iter().all(|e| *e == 0.0));
        let report = value_report(&chain, 1.0).unwrap();
        assert!(report.v_gamma.is_none());
    }

    #[test]
    fn discount_domain() {
        assert!(matches!(discounted_values(&cycle3(), 1.0), Err(Error::Domain(_))));
        assert!(matches!(fixed_rbar_solution(&cycle3(), 1.5, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_reward_chain() {
        let chain = InducedChain::new(vec![vec![0.5, 0.5], vec![0.2, 0.8]], vec![0.0, 0.0]).unwrap();
        assert_eq!(discounted_values(&chain, 0.9).unwrap(), vec![0.0, 0.0]);
        let constant = chain.shifted(2.0);
        assert!(differential_values(&constant).unwrap().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn bellman_residual_offsets() {
        let chain = cycle3();
        let gamma = 0.9;
        let v = centered_discounted_values(&chain, gamma).unwrap();
        let rate = 1.0;
        assert!(centered_bellman_residual(&chain, &v, rate, gamma) < 1e-9);
        let c = 2.5;
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        assert!(centered_bellman_residual(&chain, &shifted, rate - c * (1.0 - gamma), gamma) < 1e-9);
        let plus_one: Vec<f64> = v.iter().map(|x| x + 1.0).collect();
        let r = centered_bellman_residual(&chain, &plus_one, rate, gamma);
        assert!((r - (1.0 - gamma)).abs() < 1e-12);
    }

    #[test]
    fn fixed_rbar_endpoints() {
        let chain = cycle3();
        let gamma = 0.8;
        let centered = centered_discounted_values(&chain, gamma).unwrap();
        assert!(close(&fixed_rbar_solution(&chain, gamma, 1.0).unwrap(), &centered, 1e-9));
        let v = discounted_values(&chain, gamma).unwrap();
        assert!(close(&fixed_rbar_solution(&chain, gamma, 0.0).unwrap(), &v, 1e-9));
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[1.0, 3.0, 2.0]), 1);
        assert_eq!(argmax(&[2.0, 2.0, 0.0]), 0);
    }
}
