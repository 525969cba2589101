//! Game, policy, value and barrier tensors.
//!
//! Joint actions are flattened row-major with player 0 as the slowest-varying
//! digit: the profile `(a_0, .., a_{N-1})` lives at index
//! `sum_k a_k * A^(N-1-k)`. The file format and every contraction rely on
//! this ordering.

use ndarray::{Array2, Array3, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// Stochasticity slack for transition rows and policy rows.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// A finite discounted stochastic game with a uniform action count.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicGame {
    n_players: usize,
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    /// `[state][joint_action][player]`
    utility: Array3<f64>,
    /// `[state][joint_action][next_state]`
    transition: Array3<f64>,
}

impl DynamicGame {
    pub fn new(
        n_players: usize,
        n_states: usize,
        n_actions: usize,
        gamma: f64,
        utility: Array3<f64>,
        transition: Array3<f64>,
    ) -> Result<Self> {
        if n_players == 0 || n_states == 0 || n_actions == 0 {
            return Err(Error::Argument(format!(
                "players, states and actions must be positive (got {n_players}, {n_states}, {n_actions})"
            )));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Validation(format!("gamma must lie in [0, 1), got {gamma}")));
        }
        let n_joint = joint_count(n_players, n_actions)?;
        if utility.dim() != (n_states, n_joint, n_players) {
            return Err(Error::Shape(format!(
                "utility has shape {:?}, expected {:?}",
                utility.dim(),
                (n_states, n_joint, n_players)
            )));
        }
        if transition.dim() != (n_states, n_joint, n_states) {
            return Err(Error::Shape(format!(
                "transition has shape {:?}, expected {:?}",
                transition.dim(),
                (n_states, n_joint, n_states)
            )));
        }
        if let Some(((s, j, i), x)) = utility.indexed_iter().find(|(_, x)| !x.is_finite()) {
            return Err(Error::Validation(format!("utility[{s}][{j}][{i}] is not finite ({x})")));
        }
        for s in 0..n_states {
            for j in 0..n_joint {
                let row = transition.slice(ndarray::s![s, j, ..]);
                if let Some((k, p)) = row.indexed_iter().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
                    return Err(Error::Validation(format!(
                        "transition[{s}][{j}][{k}] = {p} is not a probability"
                    )));
                }
                let total: f64 = row.sum();
                if (total - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(Error::Validation(format!(
                        "transition row [{s}][{j}] sums to {total}, not 1"
                    )));
                }
            }
        }
        Ok(Self { n_players, n_states, n_actions, gamma, utility, transition })
    }

    /// A one-state game with `gamma = 0` and the given payoff tensor `[joint][player]`.
    pub fn static_game(n_players: usize, n_actions: usize, payoffs: Array2<f64>) -> Result<Self> {
        let n_joint = payoffs.nrows();
        let utility = payoffs.insert_axis(Axis(0));
        let transition = Array3::ones((1, n_joint, 1));
        Self::new(n_players, 1, n_actions, 0.0, utility, transition)
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_joint(&self) -> usize {
        self.utility.dim().1
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn utility(&self) -> &Array3<f64> {
        &self.utility
    }

    pub fn transition(&self) -> &Array3<f64> {
        &self.transition
    }

    /// Largest absolute utility, floored at 1e-300 so it can be used as a scale.
    pub fn utility_scale(&self) -> f64 {
        self.utility.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-300)
    }

    /// Flat index of an action profile.
    pub fn joint_index(&self, actions: &[usize]) -> usize {
        actions.iter().fold(0, |acc, &a| acc * self.n_actions + a)
    }

    /// Action profile of a flat joint index.
    pub fn joint_actions(&self, mut joint: usize) -> Vec<usize> {
        let mut out = vec![0; self.n_players];
        for k in (0..self.n_players).rev() {
            out[k] = joint % self.n_actions;
            joint /= self.n_actions;
        }
        out
    }

    pub(crate) fn check_policy(&self, policy: &Policy) -> Result<()> {
        let want = (self.n_states, self.n_players, self.n_actions);
        if policy.probs.dim() != want {
            return Err(Error::Shape(format!(
                "policy has shape {:?}, game expects {:?}",
                policy.probs.dim(),
                want
            )));
        }
        Ok(())
    }

    pub(crate) fn check_values(&self, values: &ValueFunction) -> Result<()> {
        let want = (self.n_states, self.n_players);
        if values.values.dim() != want {
            return Err(Error::Shape(format!(
                "value function has shape {:?}, game expects {:?}",
                values.values.dim(),
                want
            )));
        }
        Ok(())
    }

    pub(crate) fn check_stage(&self, stage: &Array3<f64>) -> Result<()> {
        let want = (self.n_states, self.n_joint(), self.n_players);
        if stage.dim() != want {
            return Err(Error::Shape(format!(
                "stage utility has shape {:?}, game expects {:?}",
                stage.dim(),
                want
            )));
        }
        Ok(())
    }
}

pub(crate) fn joint_count(n_players: usize, n_actions: usize) -> Result<usize> {
    u32::try_from(n_players)
        .ok()
        .and_then(|n| n_actions.checked_pow(n))
        .ok_or_else(|| Error::Argument(format!("{n_actions}^{n_players} joint actions overflow")))
}

/// Random game: utilities i.i.d. uniform on [0, 1], transition rows from a
/// flat Dirichlet (normalized i.i.d. unit exponentials).
pub fn generate_random_game(
    n_players: usize,
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    seed: u64,
) -> Result<DynamicGame> {
    if n_players == 0 || n_states == 0 || n_actions == 0 {
        return Err(Error::Argument("players, states and actions must all be at least 1".into()));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Argument(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    let n_joint = joint_count(n_players, n_actions)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let utility = Array3::from_shape_fn((n_states, n_joint, n_players), |_| rng.random::<f64>());
    let mut transition = Array3::zeros((n_states, n_joint, n_states));
    for mut row in transition.lanes_mut(Axis(2)) {
        row.mapv_inplace(|_| rng.sample::<f64, _>(Exp1));
        let total = row.sum();
        row /= total;
        // pin the sum to 1 after rounding by correcting the largest entry
        let drift = 1.0 - row.sum();
        let (k, _) = row
            .indexed_iter()
            .fold((0, f64::MIN), |best, (k, &p)| if p > best.1 { (k, p) } else { best });
        row[k] += drift;
    }
    DynamicGame::new(n_players, n_states, n_actions, gamma, utility, transition)
}

/// Per-state, per-player action distributions.
///
/// When `logits` is present the probabilities are its row-wise softmax and
/// hence strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    probs: Array3<f64>,
    logits: Option<Array3<f64>>,
}

impl Policy {
    pub fn uniform(n_states: usize, n_players: usize, n_actions: usize) -> Self {
        let logits = Array3::zeros((n_states, n_players, n_actions));
        Self::from_logits(logits)
    }

    pub fn uniform_for(game: &DynamicGame) -> Self {
        Self::uniform(game.n_states(), game.n_players(), game.n_actions())
    }

    /// Validates rows (nonnegative, summing to 1 within 1e-9) and renormalizes
    /// them so the 1e-12 invariant holds exactly.
    pub fn from_probs(mut probs: Array3<f64>) -> Result<Self> {
        let (n_states, n_players, _) = probs.dim();
        for s in 0..n_states {
            for i in 0..n_players {
                let mut row = probs.slice_mut(ndarray::s![s, i, ..]);
                if let Some((a, p)) = row.indexed_iter().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
                    return Err(Error::Validation(format!("probs[{s}][{i}][{a}] = {p} is not a probability")));
                }
                let total = row.sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Validation(format!("policy row [{s}][{i}] sums to {total}, not 1")));
                }
                row /= total;
            }
        }
        Ok(Self { probs, logits: None })
    }

    pub fn from_logits(logits: Array3<f64>) -> Self {
        let mut probs = logits.clone();
        for mut row in probs.lanes_mut(Axis(2)) {
            let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            row.mapv_inplace(|x| (x - max).exp());
            let total = row.sum();
            row /= total;
        }
        Self { probs, logits: Some(logits) }
    }

    /// Interior copy carrying `ln probs` as logits. Fails on zero entries.
    pub fn to_interior(&self) -> Result<Self> {
        if let Some(((s, i, a), _)) = self.probs.indexed_iter().find(|(_, p)| **p <= 0.0) {
            return Err(Error::Argument(format!("policy is not interior at [{s}][{i}][{a}]")));
        }
        Ok(Self::from_logits(self.probs.mapv(f64::ln)))
    }

    pub fn probs(&self) -> &Array3<f64> {
        &self.probs
    }

    pub fn logits(&self) -> Option<&Array3<f64>> {
        self.logits.as_ref()
    }

    pub fn state(&self, s: usize) -> ArrayView2<'_, f64> {
        self.probs.index_axis(Axis(0), s)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.probs.dim()
    }

    pub fn is_interior(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }
}

/// Per-state, per-player values `[state][player]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    pub values: Array2<f64>,
}

impl ValueFunction {
    pub fn zeros(n_states: usize, n_players: usize) -> Self {
        Self { values: Array2::zeros((n_states, n_players)) }
    }

    /// `V + m·1` with one shift per player.
    pub fn shifted(&self, shift: &[f64]) -> Self {
        let mut values = self.values.clone();
        for mut row in values.rows_mut() {
            for (x, m) in row.iter_mut().zip(shift) {
                *x += m;
            }
        }
        Self { values }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
    }
}

/// Barrier vector `mu[state][player][action]`, elementwise nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierParameter {
    pub mu: Array3<f64>,
}

impl BarrierParameter {
    pub fn max_norm(&self) -> f64 {
        self.mu.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
    }
}
