//! Dynamic programming operators and policy-cone geometry.
//!
//! `D_π(V)` is the on-policy expectation of the stage utility `u + γTV`;
//! `D̂_π(V)` replaces the expectation over a player's own action by a max.
//! The policy cone is `{V : V ≥ D_π(V)}` and the best response cone is
//! `{V : V ≥ D̂_π(V)}`.

use ndarray::{Array2, Axis};

use crate::contract::{deviation_utility, stage_utility};
use crate::error::{Error, Result};
use crate::game::{DynamicGame, Policy, ValueFunction};
use crate::linalg::Lu;

/// Slack for cone membership at boundary points.
pub const CONE_TOL: f64 = 1e-12;

/// Distances along `1` from `V` to the policy-cone and best-response-cone
/// hyperplanes, `[state][player]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeDistances {
    pub d: Array2<f64>,
    pub d_hat: Array2<f64>,
}

/// Deviation utility of the stage game induced by `values`.
fn stage_deviation(game: &DynamicGame, policy: &Policy, values: &ValueFunction) -> Result<ndarray::Array3<f64>> {
    let stage = stage_utility(game, values)?;
    deviation_utility(game, policy, &stage)
}

pub fn apply_d(game: &DynamicGame, policy: &Policy, values: &ValueFunction) -> Result<ValueFunction> {
    let dev = stage_deviation(game, policy, values)?;
    let values = (&dev * policy.probs()).sum_axis(Axis(2));
    Ok(ValueFunction { values })
}

pub fn apply_dhat(game: &DynamicGame, policy: &Policy, values: &ValueFunction) -> Result<ValueFunction> {
    let dev = stage_deviation(game, policy, values)?;
    let values = dev.map_axis(Axis(2), |row| row.fold(f64::NEG_INFINITY, |m, &x| m.max(x)));
    Ok(ValueFunction { values })
}

/// Exact value of a policy: solves `(I − γ T_π) V_i = u_{π,i}` for every player.
pub fn policy_value(game: &DynamicGame, policy: &Policy) -> Result<ValueFunction> {
    game.check_policy(policy)?;
    let n_states = game.n_states();
    let joint = crate::contract::joint_policy_prob(game, policy)?;
    // T_π[s][s'] and u_π[s][i]
    let mut system = Array2::<f64>::eye(n_states);
    let mut rhs = Array2::<f64>::zeros((n_states, game.n_players()));
    for s in 0..n_states {
        let w = joint.row(s);
        let t_pi = w.dot(&game.transition().index_axis(Axis(0), s));
        let u_pi = w.dot(&game.utility().index_axis(Axis(0), s));
        system.row_mut(s).scaled_add(-game.gamma(), &t_pi);
        rhs.row_mut(s).assign(&u_pi);
    }
    let lu = Lu::factor(&system);
    let values = lu
        .solve_matrix(&rhs)
        .ok_or_else(|| Error::Singular("I − γT_π is not invertible".into()))?;
    Ok(ValueFunction { values })
}

pub fn in_policy_cone(game: &DynamicGame, policy: &Policy, values: &ValueFunction) -> Result<bool> {
    let d = apply_d(game, policy, values)?;
    Ok(dominates(values, &d))
}

pub fn in_best_response_cone(game: &DynamicGame, policy: &Policy, values: &ValueFunction) -> Result<bool> {
    let d = apply_dhat(game, policy, values)?;
    Ok(dominates(values, &d))
}

fn dominates(values: &ValueFunction, image: &ValueFunction) -> bool {
    values
        .values
        .iter()
        .zip(image.values.iter())
        .all(|(v, d)| v - d >= -CONE_TOL)
}

pub fn cone_distances(game: &DynamicGame, policy: &Policy, values: &ValueFunction) -> Result<ConeDistances> {
    let scale = 1.0 - game.gamma();
    let d = (&values.values - &apply_d(game, policy, values)?.values) / scale;
    let d_hat = (&values.values - &apply_dhat(game, policy, values)?.values) / scale;
    Ok(ConeDistances { d, d_hat })
}

/// Smallest per-player `m ≥ 0` with `V + m·1` in the best response cone.
pub fn min_shift_to_best_response_cone(
    game: &DynamicGame,
    policy: &Policy,
    values: &ValueFunction,
) -> Result<Vec<f64>> {
    let dhat = apply_dhat(game, policy, values)?;
    let gap = &dhat.values - &values.values;
    let scale = 1.0 - game.gamma();
    Ok(gap
        .axis_iter(Axis(1))
        .map(|col| col.fold(0.0_f64, |m, &x| m.max(x / scale)))
        .collect())
}

/// One shifted DP step, `D_π(V + m·1)`.
pub fn dp_step(game: &DynamicGame, policy: &Policy, values: &ValueFunction, shift: &[f64]) -> Result<ValueFunction> {
    if shift.len() != game.n_players() {
        return Err(Error::Shape(format!("shift has {} entries, game has {} players", shift.len(), game.n_players())));
    }
    if let Some(m) = shift.iter().find(|m| !(**m >= 0.0)) {
        return Err(Error::Argument(format!("DP shift must be nonnegative, got {m}")));
    }
    apply_d(game, policy, &values.shifted(shift))
}

/// Scalar shift broadcast to every player.
pub fn dp_step_uniform(game: &DynamicGame, policy: &Policy, values: &ValueFunction, shift: f64) -> Result<ValueFunction> {
    dp_step(game, policy, values, &vec![shift; game.n_players()])
}
