#![allow(dead_code)]

use bundle_solve::bundle::dual_quantities_from_deviation;
use bundle_solve::contract::deviation_utility;
use bundle_solve::solver::{inner_converge, Phase, SolverState};
use bundle_solve::{BarrierParameter, DynamicGame, Policy, SolveConfig, ValueFunction};
use ndarray::{array, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_policy(rng: &mut ChaCha8Rng, dims: (usize, usize, usize)) -> Policy {
    Policy::from_logits(Array3::from_shape_fn(dims, |_| rng.random_range(-2.0..2.0)))
}

/// Log-uniform barrier entries in `[10^lo, 10^hi]`.
pub fn random_mu(rng: &mut ChaCha8Rng, dims: (usize, usize, usize), lo: f64, hi: f64) -> BarrierParameter {
    BarrierParameter { mu: Array3::from_shape_fn(dims, |_| 10f64.powf(rng.random_range(lo..hi))) }
}

pub fn random_values(rng: &mut ChaCha8Rng, n_states: usize, n_players: usize) -> ValueFunction {
    ValueFunction { values: Array2::from_shape_fn((n_states, n_players), |_| rng.random_range(-3.0..3.0)) }
}

pub fn pennies() -> DynamicGame {
    DynamicGame::static_game(2, 2, array![[1.0, -1.0], [-1.0, 1.0], [-1.0, 1.0], [1.0, -1.0]]).unwrap()
}

pub fn rock_paper_scissors() -> DynamicGame {
    // rows: (a0, a1) with 0 = rock, 1 = paper, 2 = scissors
    let beats = |a: usize, b: usize| -> f64 {
        if a == b {
            0.0
        } else if (a + 3 - b) % 3 == 1 {
            1.0
        } else {
            -1.0
        }
    };
    let payoffs = Array2::from_shape_fn((9, 2), |(j, i)| {
        let (a, b) = (j / 3, j % 3);
        if i == 0 {
            beats(a, b)
        } else {
            beats(b, a)
        }
    });
    DynamicGame::static_game(2, 3, payoffs).unwrap()
}

/// Objective `Σ (π − π̂₀)(r − r̂₀)` as a function of the logits, with the
/// stage game, `μ` and the duals of the base point frozen; `v` is re-solved.
pub fn frozen_objective<'a>(
    game: &'a DynamicGame,
    stage: &'a Array3<f64>,
    mu: &'a BarrierParameter,
    pi_hat: &'a Array3<f64>,
    r_hat: &'a Array3<f64>,
) -> impl Fn(&Array3<f64>) -> f64 + 'a {
    move |logits| {
        let p = Policy::from_logits(logits.clone());
        let dev = deviation_utility(game, &p, stage).unwrap();
        let dq = dual_quantities_from_deviation(&p, mu, &dev).unwrap();
        ndarray::Zip::from(p.probs())
            .and(pi_hat)
            .and(&dq.r)
            .and(r_hat)
            .fold(0.0, |acc, &x, &xh, &r, &rh| acc + (x - xh) * (r - rh))
    }
}

/// Bundle point over `mu` of a one-state game, reached by the inner loop from `start`.
pub fn bundle_point(game: &DynamicGame, start: &Policy, mu: &BarrierParameter) -> Policy {
    let cfg = SolveConfig { inner_tol_bias: 1e-13, ..Default::default() };
    let mut state = SolverState::new(game, &cfg, Some(start)).unwrap();
    state.mu = mu.clone();
    assert_eq!(inner_converge(game, &mut state, &cfg).unwrap(), Phase::Done);
    state.policy
}

pub fn max_abs_diff3(a: &Array3<f64>, b: &Array3<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}
