mod common;

use bundle_solve::bundle::{
    canonical_descent_step, canonical_section, coefficient_matrix, dual_quantities, initial_barrier,
    solve_dual_value, unbiased_objective, unbiased_objective_closed_form,
};
use bundle_solve::dp::{apply_d, apply_dhat, policy_value};
use bundle_solve::{generate_random_game, stage_utility, BarrierParameter, Policy};
use common::*;
use ndarray::{array, Array2, Array3, Axis};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brouwer_map_is_normalized(n in 1usize..4, a in 1usize..5, lo in -6.0..0.0f64, seed in any::<u64>()) {
        let game = generate_random_game(n, 2, a, 0.5, seed).unwrap();
        let mut r = rng(seed);
        let policy = random_policy(&mut r, (2, n, a));
        let mu = random_mu(&mut r, (2, n, a), lo, lo + 6.0);
        let stage = stage_utility(&game, &random_values(&mut r, 2, n)).unwrap();
        let dq = dual_quantities(&game, &policy, &mu, &stage).unwrap();
        for row in dq.pi_hat.lanes(Axis(2)) {
            prop_assert!((row.sum() - 1.0).abs() < 1e-10);
        }
        prop_assert!(dq.r.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn objective_is_nonnegative(n in 1usize..4, a in 2usize..4, seed in any::<u64>()) {
        let game = generate_random_game(n, 1, a, 0.0, seed).unwrap();
        let mut r = rng(seed);
        let policy = random_policy(&mut r, (1, n, a));
        let mu = random_mu(&mut r, (1, n, a), -2.0, 1.0);
        let dq = dual_quantities(&game, &policy, &mu, game.utility()).unwrap();
        let f = unbiased_objective(&policy, &dq);
        prop_assert!(f >= 0.0);
        let closed = unbiased_objective_closed_form(&policy, &mu, &dq.r);
        prop_assert!((f - closed).abs() <= 1e-9 * (1.0 + f.abs()));
    }

    #[test]
    fn regret_dominates_on_the_fiber(n in 1usize..4, s in 1usize..3, a in 2usize..4, seed in any::<u64>()) {
        let game = generate_random_game(n, s, a, 0.6, seed).unwrap();
        let mut r = rng(seed);
        let policy = random_policy(&mut r, (s, n, a));
        let v = policy_value(&game, &policy).unwrap();
        let bar = canonical_section(&game, &policy, &v).unwrap();
        prop_assert!(bar.mu.iter().all(|&x| x >= 0.0));
        let lift = Array2::from_shape_fn((s, n), |_| r.random_range(0.0..3.0));
        let member = Array3::from_shape_fn((s, n, a), |(st, i, b)| lift[[st, i]] * policy.probs()[[st, i, b]] + bar.mu[[st, i, b]]);
        prop_assert!(member.iter().zip(bar.mu.iter()).all(|(m, b)| m >= b));
        let gap = &apply_dhat(&game, &policy, &v).unwrap().values - &apply_d(&game, &policy, &v).unwrap().values;
        prop_assert!(gap.iter().all(|&g| g >= -1e-12));
    }
}

#[test]
fn objective_vanishes_on_the_bundle() {
    let game = pennies();
    let policy = Policy::uniform_for(&game);
    let mu = BarrierParameter { mu: Array3::from_elem((1, 2, 2), 0.3) };
    let dq = dual_quantities(&game, &policy, &mu, game.utility()).unwrap();
    assert!(unbiased_objective(&policy, &dq) < 1e-24);
    assert!(dq.bias_norm(&policy) < 1e-12);
}

#[test]
fn dual_value_rejects_nonpositive_barrier() {
    assert!(solve_dual_value(&[1.0, 0.0], &[0.0, 1.0]).is_err());
    assert!(solve_dual_value(&[1.0, -1.0], &[0.0, 1.0]).is_err());
    let v = solve_dual_value(&[0.5, 0.5], &[0.0, 0.0]).unwrap();
    assert!((v - 1.0).abs() < 1e-12);
}

#[test]
fn one_action_coefficient_matrix() {
    let c = coefficient_matrix(array![[0.7]].view(), array![[1.0]].view(), ndarray::Array4::zeros((1, 1, 1, 1)).view());
    assert_eq!(c.matrix, array![[1.0, 1.0], [0.7, 0.0]]);
    assert!(!c.is_singular(1e-10));
}

#[test]
fn descent_step_scales_and_lifts() {
    let policy = Policy::uniform(1, 1, 2);
    let mu = BarrierParameter { mu: array![[[1.0, 3.0]]] };
    let next = canonical_descent_step(&mu, &policy, &array![[0.5]], &array![[2.0]]).unwrap();
    assert_eq!(next.mu, array![[[1.5, 2.5]]]);
    assert!(canonical_descent_step(&mu, &policy, &array![[1.0]], &array![[0.0]]).is_err());
    assert!(canonical_descent_step(&mu, &policy, &array![[0.1]], &array![[-1.0]]).is_err());
}

#[test]
fn initial_barrier_needs_interior_policy() {
    let interior = Policy::uniform(2, 2, 3);
    let mu = initial_barrier(&interior, 10.0).unwrap();
    assert!(mu.mu.iter().all(|&x| (x - 10.0 / 3.0).abs() < 1e-12));
    let edge = Policy::from_probs(array![[[1.0, 0.0]]]).unwrap();
    assert!(initial_barrier(&edge, 1.0).is_err());
    assert!(initial_barrier(&interior, 0.0).is_err());
}
