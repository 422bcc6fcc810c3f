//! Identities of the exact solver over a fixed suite of random ergodic MDPs,
//! plus frozen reference tables for the seven-state walk.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reward_centering::envs::{Environment, RandomWalk7, ThreeStateMrp};
use reward_centering::mdp::{induce_chain, FiniteMdp, InducedChain, PolicyMatrix};
use reward_centering::solver::*;

const SUITE_SIZE: u64 = 120;
const GAMMAS: [f64; 3] = [0.5, 0.9, 0.99];

/// A random MDP with up to 10 states and 4 actions. Every action keeps an
/// edge to the next state on a ring, so every policy is irreducible.
fn random_mdp(seed: u64) -> (FiniteMdp, PolicyMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=10);
    let m = rng.gen_range(1..=4);
    let mut mdp = FiniteMdp::zeros(n, m).unwrap();
    for s in 0..n {
        for a in 0..m {
            let mut w: Vec<f64> = (0..n)
                .map(|_| if rng.gen_bool(0.5) { rng.gen::<f64>() } else { 0.0 })
                .collect();
            w[(s + 1) % n] += 0.1;
            let total: f64 = w.iter().sum();
            for (s2, x) in w.iter().enumerate() {
                mdp.set(s, a, s2, x / total, rng.gen_range(-5.0..5.0));
            }
        }
    }
    let probs = (0..n)
        .map(|_| {
            let w: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 0.01).collect();
            let total: f64 = w.iter().sum();
            w.iter().map(|x| x / total).collect()
        })
        .collect();
    (mdp, PolicyMatrix::new(probs).unwrap())
}

fn suite() -> impl Iterator<Item = (u64, FiniteMdp, InducedChain)> {
    (0..SUITE_SIZE).map(|seed| {
        let (mdp, pi) = random_mdp(seed);
        let chain = induce_chain(&mdp, &pi).unwrap();
        (seed, mdp, chain)
    })
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn laurent_identity_holds_on_suite() {
    for (seed, _, chain) in suite() {
        let rate = average_reward(&chain).unwrap();
        let diff = differential_values(&chain).unwrap();
        for g in GAMMAS {
            let v = discounted_values(&chain, g).unwrap();
            let e = laurent_error(&chain, g).unwrap();
            let scale = max_abs(v.iter().copied()).max(1.0);
            let gap = max_abs((0..v.len()).map(|s| v[s] - (rate / (1.0 - g) + diff[s] + e[s])));
            assert!(gap < 1e-9 * scale, "seed {seed} gamma {g}: {gap:e}");

            let report = value_report(&chain, g).unwrap();
            let vg = report.v_gamma.unwrap();
            assert!(max_abs((0..v.len()).map(|s| vg[s] - report.avg_reward / (1.0 - g) - report.v_centered[s])) < 1e-9 * scale);
            assert!(max_abs((0..v.len()).map(|s| report.v_centered[s] - report.v_diff[s] - report.laurent_error[s])) < 1e-9);
        }
    }
}

#[test]
fn centered_values_average_to_zero() {
    for (seed, _, chain) in suite() {
        let d = stationary_distribution(&chain).unwrap();
        for g in GAMMAS.into_iter().chain([1.0]) {
            let vc = centered_discounted_values(&chain, g).unwrap();
            let weighted: f64 = d.iter().zip(&vc).map(|(a, b)| a * b).sum();
            assert!(weighted.abs() < 1e-9, "seed {seed} gamma {g}: {weighted:e}");
        }
    }
}

#[test]
fn solution_family_satisfies_centered_equation() {
    for (seed, _, chain) in suite() {
        let rate = average_reward(&chain).unwrap();
        for g in GAMMAS {
            let vc = centered_discounted_values(&chain, g).unwrap();
            for c in [-1.0, 0.0, 2.5] {
                let shifted: Vec<f64> = vc.iter().map(|v| v + c).collect();
                let res = centered_bellman_residual(&chain, &shifted, rate - c * (1.0 - g), g);
                assert!(res < 1e-9, "seed {seed} gamma {g} c {c}: {res:e}");
            }
            let off_by_one: Vec<f64> = vc.iter().map(|v| v + 1.0).collect();
            let res = centered_bellman_residual(&chain, &off_by_one, rate, g);
            assert!((res - (1.0 - g)).abs() < 1e-9);
        }
    }
}

#[test]
fn laurent_error_shrinks_as_discount_grows() {
    for (seed, _, chain) in suite() {
        let sizes: Vec<f64> = [0.9, 0.99, 0.999]
            .iter()
            .map(|&g| max_abs(laurent_error(&chain, g).unwrap()))
            .collect();
        assert!(sizes[1] <= sizes[0] && sizes[2] <= sizes[1], "seed {seed}: {sizes:?}");
    }
}

#[test]
fn reward_shift_moves_only_the_rate() {
    for (seed, mdp, _) in suite() {
        let (_, pi) = random_mdp(seed);
        let base = induce_chain(&mdp, &pi).unwrap();
        for c in [-8.0, 0.5, 4.0] {
            let shifted = induce_chain(&mdp.shifted(c), &pi).unwrap();
            let dr = average_reward(&shifted).unwrap() - average_reward(&base).unwrap();
            assert!((dr - c).abs() < 1e-9, "seed {seed}");
            for g in GAMMAS {
                let a = centered_discounted_values(&base, g).unwrap();
                let b = centered_discounted_values(&shifted, g).unwrap();
                assert!(max_abs(a.iter().zip(&b).map(|(x, y)| x - y)) < 1e-9, "seed {seed} gamma {g} c {c}");
            }
        }
    }
}

#[test]
fn fixed_rbar_solutions_are_offset_centered_values() {
    for (seed, _, chain) in suite().take(30) {
        let rate = average_reward(&chain).unwrap();
        for g in GAMMAS {
            let vc = centered_discounted_values(&chain, g).unwrap();
            for rbar in [0.0, rate, rate + 1.5] {
                let v = fixed_rbar_solution(&chain, g, rbar).unwrap();
                let k = (rate - rbar) / (1.0 - g);
                let scale = max_abs(v.iter().copied()).max(1.0);
                assert!(max_abs(v.iter().zip(&vc).map(|(x, y)| x - y - k)) < 1e-9 * scale, "seed {seed}");
            }
        }
    }
}

#[test]
fn optimality_equation_shifts_with_rbar() {
    for (seed, mdp, _) in suite().take(30) {
        for g in [0.5, 0.9] {
            let q0 = optimal_discounted_q(&mdp, g, 0.0).unwrap();
            let q1 = optimal_discounted_q(&mdp, g, 0.7).unwrap();
            for (r0, r1) in q0.iter().zip(&q1) {
                for (a, b) in r0.iter().zip(r1) {
                    assert!((b - (a - 0.7 / (1.0 - g))).abs() < 1e-9, "seed {seed}");
                }
            }
            assert!(centered_optimality_residual(&mdp, &q1, 0.7, g) < 1e-9);
        }
    }
}

#[test]
fn fixed_point_prediction_matches_closed_form() {
    for (seed, mdp, _) in suite().take(30) {
        for eta in [0.01, 0.25, 1.0] {
            let p = relative_q_fixed_point(&mdp, 0.9, eta).unwrap();
            let pairs = (mdp.n_states() * mdp.n_actions()) as f64;
            let total: f64 = p.q_star.iter().flatten().sum();
            let denom = 1.0 - 0.9 + eta * pairs;
            for (qs, qt) in p.q_star.iter().zip(&p.q_tilde_inf) {
                for (a, b) in qs.iter().zip(qt) {
                    assert!((b - (a - eta / denom * total)).abs() < 1e-9, "seed {seed}");
                }
            }
            assert!((p.rbar_inf - eta * 0.1 / denom * total).abs() < 1e-9);
            assert!(centered_optimality_residual(&mdp, &p.q_tilde_inf, p.rbar_inf, 0.9) < 1e-8);
        }
    }
}

// Seven-state walk references, computed independently by enumerating all
// 128 deterministic policies and evaluating each with a linear solve.
const Q_STAR_WALK_09: [[f64; 2]; 7] = [
    [14.354754289038, 11.62735097412],
    [12.919278860134, 12.019278860134],
    [11.62735097412, 13.354754289038],
    [12.019278860134, 14.838615876708],
    [13.354754289038, 16.48735097412],
    [14.838615876708, 18.319278860134],
    [16.48735097412, 20.354754289038],
];
const Q_STAR_WALK_09_SUM: f64 = 202.60276824658345;
const RBAR_INF_WALK: f64 = 1.4069636683790514;
const CENTERED_WALK_09: [f64; 7] = [
    -0.378925254312,
    -0.816032728881,
    -0.878925254312,
    -0.581578947368,
    0.142083149049,
    1.452874834144,
    3.642083149049,
];

fn walk() -> FiniteMdp {
    RandomWalk7::new().as_finite_mdp().unwrap()
}

#[test]
fn walk_optimal_values_match_policy_enumeration() {
    let q = optimal_discounted_q(&walk(), 0.9, 0.0).unwrap();
    for (row, expected) in q.iter().zip(Q_STAR_WALK_09) {
        for (a, b) in row.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
    }
    assert!((q.iter().flatten().sum::<f64>() - Q_STAR_WALK_09_SUM).abs() < 1e-8);
}

#[test]
fn walk_fixed_point_tables() {
    let p = relative_q_fixed_point(&walk(), 0.9, 0.25).unwrap();
    let offset = 0.25 / (0.1 + 0.25 * 14.0) * Q_STAR_WALK_09_SUM;
    for (row, expected) in p.q_tilde_inf.iter().zip(Q_STAR_WALK_09) {
        for (a, b) in row.iter().zip(expected) {
            assert!((a - (b - offset)).abs() < 1e-8);
        }
    }
    assert!((p.rbar_inf - RBAR_INF_WALK).abs() < 1e-9);
    let thumb = rule_of_thumb(&walk(), &p).unwrap();
    // Always-right cycles 3 -> 4 -> 5 -> 6 -> 3 collecting 7 every 4 steps.
    assert!((thumb.optimal_rate - 1.75).abs() < 1e-10);
    let kappa = 0.25 * 14.0;
    assert!((thumb.ratio - RBAR_INF_WALK / (kappa / (0.1 + kappa) * 1.75)).abs() < 1e-9);
}

#[test]
fn walk_uniform_policy_values() {
    let chain = induce_chain(&walk(), &PolicyMatrix::uniform(7, 2)).unwrap();
    let vc = centered_discounted_values(&chain, 0.9).unwrap();
    for (a, b) in vc.iter().zip(CENTERED_WALK_09) {
        assert!((a - b).abs() < 1e-9);
    }
    let shifted = fixed_rbar_solution(&chain, 0.99, 0.5).unwrap();
    let vc99 = centered_discounted_values(&chain, 0.99).unwrap();
    for (a, b) in shifted.iter().zip(&vc99) {
        assert!((a - (b - 25.0)).abs() < 1e-9);
    }
    let near_one = centered_discounted_values(&chain, 0.99999).unwrap();
    let diff = differential_values(&chain).unwrap();
    assert!(max_abs(near_one.iter().zip(&diff).map(|(a, b)| a - b)) < 1e-4);
}

#[test]
fn two_state_chain_and_degenerate_inputs() {
    let chain = InducedChain::new(vec![vec![0.9, 0.1], vec![0.5, 0.5]], vec![0.0, 0.0]).unwrap();
    let d = stationary_distribution(&chain).unwrap();
    assert!((d[0] - 5.0 / 6.0).abs() < 1e-12 && (d[1] - 1.0 / 6.0).abs() < 1e-12);
    assert_eq!(average_reward(&chain).unwrap(), 0.0);
    assert!(discounted_values(&chain, 0.9).unwrap().iter().all(|v| *v == 0.0));

    let constant = InducedChain::new(chain.p.clone(), vec![2.0, 2.0]).unwrap();
    assert!(max_abs(differential_values(&constant).unwrap()) < 1e-12);

    let absorbing = InducedChain::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]], vec![1.0, 0.0]).unwrap();
    assert!(matches!(stationary_distribution(&absorbing), Err(reward_centering::Error::NotErgodic(_))));
    assert!(matches!(discounted_values(&chain, 1.0), Err(reward_centering::Error::Domain(_))));

    let mrp = ThreeStateMrp::new().as_finite_mdp().unwrap();
    let zero = mrp.shifted(0.0);
    assert_eq!(zero, mrp);
}
