//! Expected-utility contractions of a joint-action tensor against a policy.
//!
//! Each contraction folds one player's axis at a time, the way an einsum
//! would, so a state costs `O(N · A^N)` per kept player set.

use ndarray::{Array2, Array3, Array5, ArrayView2, Axis};

use crate::error::Result;
use crate::game::{DynamicGame, Policy, ValueFunction};

/// Folds `axis` of a row-major tensor with shape `dims` against `weights`.
fn contract_axis(data: &[f64], dims: &[usize], axis: usize, weights: &[f64]) -> Vec<f64> {
    let outer: usize = dims[..axis].iter().product();
    let n = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * inner];
    for o in 0..outer {
        let dst = &mut out[o * inner..(o + 1) * inner];
        for (a, &w) in weights.iter().enumerate().take(n) {
            let src = &data[(o * n + a) * inner..(o * n + a + 1) * inner];
            for (d, &x) in dst.iter_mut().zip(src) {
                *d += w * x;
            }
        }
    }
    out
}

/// Contracts every player axis not in `keep`; the result is indexed by the
/// kept players in increasing player order.
pub(crate) fn contract_except(data: &[f64], probs: ArrayView2<'_, f64>, keep: &[usize]) -> Vec<f64> {
    let (n_players, n_actions) = probs.dim();
    let mut dims = vec![n_actions; n_players];
    let mut cur = data.to_vec();
    for k in (0..n_players).rev() {
        if keep.contains(&k) {
            continue;
        }
        let row = probs.row(k);
        let weights: Vec<f64> = row.iter().copied().collect();
        cur = contract_axis(&cur, &dims, k, &weights);
        dims.remove(k);
    }
    cur
}

/// `pi_A^s`: probability of each joint action, `[state][joint]`.
pub fn joint_policy_prob(game: &DynamicGame, policy: &Policy) -> Result<Array2<f64>> {
    game.check_policy(policy)?;
    let mut out = Array2::zeros((game.n_states(), game.n_joint()));
    for s in 0..game.n_states() {
        let probs = policy.state(s);
        let mut acc = vec![1.0];
        for row in probs.rows() {
            acc = acc.iter().flat_map(|&w| row.iter().map(move |&p| w * p)).collect();
        }
        out.row_mut(s).assign(&ndarray::ArrayView1::from(&acc));
    }
    Ok(out)
}

/// Deviation utility for one state: `[player][action]`.
pub(crate) fn deviation_utility_state(stage: ArrayView2<'_, f64>, probs: ArrayView2<'_, f64>) -> Array2<f64> {
    let (n_players, n_actions) = probs.dim();
    let mut out = Array2::zeros((n_players, n_actions));
    for i in 0..n_players {
        let column: Vec<f64> = stage.column(i).iter().copied().collect();
        let reduced = contract_except(&column, probs, &[i]);
        out.row_mut(i).assign(&ndarray::ArrayView1::from(&reduced));
    }
    out
}

/// `pi_{Aa}^{si-} U_A^{si}`: expected stage utility to player `i` for playing
/// `a` while everyone else follows `policy`. Shape `[state][player][action]`.
pub fn deviation_utility(game: &DynamicGame, policy: &Policy, stage: &Array3<f64>) -> Result<Array3<f64>> {
    game.check_policy(policy)?;
    game.check_stage(stage)?;
    let mut out = Array3::zeros((game.n_states(), game.n_players(), game.n_actions()));
    for s in 0..game.n_states() {
        let dev = deviation_utility_state(stage.index_axis(Axis(0), s), policy.state(s));
        out.index_axis_mut(Axis(0), s).assign(&dev);
    }
    Ok(out)
}

/// Pairwise deviation utility for one state: `[i][j][a][a']`, zero on `i == j`.
pub(crate) fn deviation_utility_pairs_state(
    stage: ArrayView2<'_, f64>,
    probs: ArrayView2<'_, f64>,
) -> ndarray::Array4<f64> {
    let (n_players, n_actions) = probs.dim();
    let mut out = ndarray::Array4::zeros((n_players, n_players, n_actions, n_actions));
    for i in 0..n_players {
        let column: Vec<f64> = stage.column(i).iter().copied().collect();
        for j in 0..n_players {
            if i == j {
                continue;
            }
            let reduced = contract_except(&column, probs, &[i, j]);
            for a in 0..n_actions {
                for b in 0..n_actions {
                    // kept axes come out in increasing player order
                    let idx = if i < j { a * n_actions + b } else { b * n_actions + a };
                    out[[i, j, a, b]] = reduced[idx];
                }
            }
        }
    }
    out
}

/// `pi_{Aaa'}^{sij-} U_A^{si}`: expected stage utility to player `i` when `i`
/// plays `a` and `j` plays `a'`. Shape `[state][i][j][a][a']`.
pub fn deviation_utility_pairs(game: &DynamicGame, policy: &Policy, stage: &Array3<f64>) -> Result<Array5<f64>> {
    game.check_policy(policy)?;
    game.check_stage(stage)?;
    let (n, a) = (game.n_players(), game.n_actions());
    let mut out = Array5::zeros((game.n_states(), n, n, a, a));
    for s in 0..game.n_states() {
        let pairs = deviation_utility_pairs_state(stage.index_axis(Axis(0), s), policy.state(s));
        out.index_axis_mut(Axis(0), s).assign(&pairs);
    }
    Ok(out)
}

/// Next-state distribution when player `i` deviates to `a` and everyone else
/// follows `policy`: `[state][player][action][next_state]`.
pub fn deviation_transition(game: &DynamicGame, policy: &Policy) -> Result<ndarray::Array4<f64>> {
    game.check_policy(policy)?;
    let (n, a, n_states) = (game.n_players(), game.n_actions(), game.n_states());
    let mut out = ndarray::Array4::zeros((n_states, n, a, n_states));
    for s in 0..n_states {
        let probs = policy.state(s);
        let block = game.transition().index_axis(Axis(0), s);
        for next in 0..n_states {
            let column: Vec<f64> = block.column(next).iter().copied().collect();
            for i in 0..n {
                let reduced = contract_except(&column, probs, &[i]);
                for (b, x) in reduced.into_iter().enumerate() {
                    out[[s, i, b, next]] = x;
                }
            }
        }
    }
    Ok(out)
}

/// `U = u + gamma · T V`, shape `[state][joint][player]`.
pub fn stage_utility(game: &DynamicGame, values: &ValueFunction) -> Result<Array3<f64>> {
    game.check_values(values)?;
    let mut out = game.utility().clone();
    if game.gamma() == 0.0 {
        return Ok(out);
    }
    for s in 0..game.n_states() {
        // [joint][next] · [next][player]
        let cont = game.transition().index_axis(Axis(0), s).dot(&values.values);
        out.index_axis_mut(Axis(0), s).scaled_add(game.gamma(), &cont);
    }
    Ok(out)
}
