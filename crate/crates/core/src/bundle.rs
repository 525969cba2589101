//! Interior-point core on the equilibrium bundle.
//!
//! For a barrier vector `μ > 0` and a policy `π`, the dual value `v` of each
//! (state, player) is the unique root of `Σ_a μ_a / (v − devU_a) = 1` above
//! `max_a devU_a`. From it come the regret `r = v − devU`, the dual policy
//! `π̂ = μ / r` and the dual regret `r̂ = μ / π`. A pair `(π, μ)` lies on the
//! bundle exactly when `π = π̂`.
//!
//! The fiber over `π` is `{ v∘π + μ̄(π) : v ≥ 0 }` where the canonical section
//! `μ̄ = π ∘ (max_a devU − devU)` is its least element; zeros of `μ̄` are the
//! equilibria.

use ndarray::{s, Array2, Array3, Array5, ArrayView1, ArrayView2, ArrayView4, Axis};

use crate::contract::{deviation_utility, stage_utility};
use crate::error::{Error, Result};
use crate::game::{BarrierParameter, DynamicGame, Policy, ValueFunction};
use crate::linalg::Lu;

/// Residual target for the dual-value root.
pub const DUAL_ROOT_TOL: f64 = 1e-12;

/// Reciprocal condition number below which the coefficient matrix counts as singular.
pub const DEFAULT_SINGULAR_RCOND: f64 = 1e-10;

/// Dual value, regret, dual policy and dual regret for every (state, player).
#[derive(Debug, Clone, PartialEq)]
pub struct DualQuantities {
    /// `[state][player]`
    pub v: Array2<f64>,
    /// `[state][player][action]`
    pub r: Array3<f64>,
    pub pi_hat: Array3<f64>,
    pub r_hat: Array3<f64>,
}

impl DualQuantities {
    /// `‖π − π̂‖∞`
    pub fn bias_norm(&self, policy: &Policy) -> f64 {
        max_abs_diff(policy.probs(), &self.pi_hat)
    }

    /// `‖r − r̂‖∞`
    pub fn regret_bias_norm(&self) -> f64 {
        max_abs_diff(&self.r, &self.r_hat)
    }
}

fn max_abs_diff(a: &Array3<f64>, b: &Array3<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

/// Offset `t = v − max devU > 0` solving `Σ_a μ_a / (t + gap_a) = 1`, where
/// `gap_a = max devU − devU_a ≥ 0`. Working with the offset keeps the regret of
/// the best action free of cancellation.
fn dual_offset(mu: ArrayView1<'_, f64>, gaps: &[f64]) -> f64 {
    let f = |t: f64| -> (f64, f64) {
        let (mut val, mut slope) = (-1.0, 0.0);
        for (&m, &g) in mu.iter().zip(gaps) {
            let d = t + g;
            val += m / d;
            slope -= m / (d * d);
        }
        (val, slope)
    };
    let mu_min = mu.fold(f64::INFINITY, |m, &x| m.min(x));
    let mu_sum = mu.sum();
    let range = gaps.iter().fold(0.0_f64, |m, &g| m.max(g));
    // f(lo) ≥ 0 because the zero-gap term alone is ≥ 1; f(hi) ≤ 0 because
    // every denominator is at least Σμ.
    let (mut lo, mut hi) = (mu_min, mu_sum + range);
    let mut t = lo;
    for _ in 0..200 {
        let (val, slope) = f(t);
        if val == 0.0 {
            break;
        }
        if val > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - val / slope;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let settled = (next - t).abs() <= 2.0 * f64::EPSILON * t;
        t = next;
        if settled || hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    t
}

/// Unique root `v` of `Σ_a μ_a / (v − devU_a) = 1` on `(max devU, ∞)`.
pub fn solve_dual_value(mu_row: &[f64], dev_row: &[f64]) -> Result<f64> {
    if mu_row.len() != dev_row.len() || mu_row.is_empty() {
        return Err(Error::Shape(format!(
            "barrier row has {} entries, deviation row has {}",
            mu_row.len(),
            dev_row.len()
        )));
    }
    if let Some(m) = mu_row.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(Error::Domain(format!("barrier entries must be positive, got {m}")));
    }
    let max = dev_row.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let gaps: Vec<f64> = dev_row.iter().map(|d| max - d).collect();
    Ok(max + dual_offset(ArrayView1::from(mu_row), &gaps))
}

/// Dual quantities from precomputed deviation utilities `[state][player][action]`.
pub fn dual_quantities_from_deviation(
    policy: &Policy,
    mu: &BarrierParameter,
    dev: &Array3<f64>,
) -> Result<DualQuantities> {
    let dims = policy.dims();
    if mu.mu.dim() != dims || dev.dim() != dims {
        return Err(Error::Shape(format!(
            "policy {:?}, barrier {:?} and deviation {:?} disagree",
            dims,
            mu.mu.dim(),
            dev.dim()
        )));
    }
    if let Some(((s, i, a), m)) = mu.mu.indexed_iter().find(|(_, m)| !(**m > 0.0 && m.is_finite())) {
        return Err(Error::Domain(format!("mu[{s}][{i}][{a}] = {m} must be positive")));
    }
    let (n_states, n_players, n_actions) = dims;
    let mut v = Array2::zeros((n_states, n_players));
    let mut r = Array3::zeros(dims);
    for st in 0..n_states {
        for i in 0..n_players {
            let dev_row = dev.slice(s![st, i, ..]);
            let max = dev_row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            let gaps: Vec<f64> = dev_row.iter().map(|d| max - d).collect();
            let t = dual_offset(mu.mu.slice(s![st, i, ..]), &gaps);
            v[[st, i]] = max + t;
            for a in 0..n_actions {
                r[[st, i, a]] = t + gaps[a];
            }
        }
    }
    let pi_hat = &mu.mu / &r;
    let r_hat = &mu.mu / policy.probs();
    Ok(DualQuantities { v, r, pi_hat, r_hat })
}

/// Dual quantities of the stage game `stage` (`[state][joint][player]`).
pub fn dual_quantities(
    game: &DynamicGame,
    policy: &Policy,
    mu: &BarrierParameter,
    stage: &Array3<f64>,
) -> Result<DualQuantities> {
    let dev = deviation_utility(game, policy, stage)?;
    dual_quantities_from_deviation(policy, mu, &dev)
}

/// `Σ (π − π̂)(r − r̂)`
pub fn unbiased_objective(policy: &Policy, dq: &DualQuantities) -> f64 {
    let probs = policy.probs();
    ndarray::Zip::from(probs)
        .and(&dq.pi_hat)
        .and(&dq.r)
        .and(&dq.r_hat)
        .fold(0.0, |acc, &p, &ph, &r, &rh| acc + (p - ph) * (r - rh))
}

/// `Σ (π∘r + μ²/(π∘r) − 2μ)`, the same objective written without the duals.
pub fn unbiased_objective_closed_form(policy: &Policy, mu: &BarrierParameter, r: &Array3<f64>) -> f64 {
    ndarray::Zip::from(policy.probs())
        .and(&mu.mu)
        .and(r)
        .fold(0.0, |acc, &p, &m, &r| {
            let x = p * r;
            acc + x + m * m / x - 2.0 * m
        })
}

/// `H = Diag(r) − pairs∘π` for one state, flattened over `(player, action)`.
fn h_block(probs: ArrayView2<'_, f64>, diag: ArrayView2<'_, f64>, pairs: ArrayView4<'_, f64>) -> Array2<f64> {
    let (n, a) = probs.dim();
    let mut h = Array2::zeros((n * a, n * a));
    for i in 0..n {
        for ai in 0..a {
            let row = i * a + ai;
            h[[row, row]] = diag[[i, ai]];
            for j in 0..n {
                if j == i {
                    continue;
                }
                for aj in 0..a {
                    h[[row, j * a + aj]] = -pairs[[i, j, ai, aj]] * probs[[j, aj]];
                }
            }
        }
    }
    h
}

/// Logit-space gradient of the unbiased objective, holding `π̂` and `r̂` as
/// parameters: `pg = (π − π̂) H (I − 1 π)` per (state, player) block.
pub fn projected_gradient(policy: &Policy, dq: &DualQuantities, pairs: &Array5<f64>) -> Array3<f64> {
    let probs = policy.probs();
    let (n_states, n, a) = policy.dims();
    let mut out = Array3::zeros((n_states, n, a));
    for st in 0..n_states {
        let p = probs.index_axis(Axis(0), st);
        let h = h_block(p, dq.r.index_axis(Axis(0), st), pairs.index_axis(Axis(0), st));
        let bias: Vec<f64> = p
            .iter()
            .zip(dq.pi_hat.index_axis(Axis(0), st).iter())
            .map(|(x, y)| x - y)
            .collect();
        let g = ArrayView1::from(&bias).dot(&h);
        for j in 0..n {
            let block = g.slice(s![j * a..(j + 1) * a]);
            let total = block.sum();
            for c in 0..a {
                out[[st, j, c]] = block[c] - total * p[[j, c]];
            }
        }
    }
    out
}

/// `μ̄ = π ∘ (max_a devU − devU)` from deviation utilities.
pub fn canonical_section_from_deviation(policy: &Policy, dev: &Array3<f64>) -> BarrierParameter {
    let (n_states, n, a) = dev.dim();
    let mut mu = Array3::zeros(dev.dim());
    for st in 0..n_states {
        for i in 0..n {
            let max = dev.slice(s![st, i, ..]).fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            for b in 0..a {
                mu[[st, i, b]] = policy.probs()[[st, i, b]] * (max - dev[[st, i, b]]);
            }
        }
    }
    BarrierParameter { mu }
}

/// Canonical section of the stage game induced by `values`. Pass the policy
/// value to get the dynamic-game section.
pub fn canonical_section(game: &DynamicGame, policy: &Policy, values: &ValueFunction) -> Result<BarrierParameter> {
    let stage = stage_utility(game, values)?;
    let dev = deviation_utility(game, policy, &stage)?;
    Ok(canonical_section_from_deviation(policy, &dev))
}

/// Bundle coefficient matrix `[[H, B̂], [B̌, 0]]` of one state with its LU.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    pub matrix: Array2<f64>,
    pub rcond: f64,
    lu: Lu,
}

impl CoefficientMatrix {
    pub fn is_singular(&self, threshold: f64) -> bool {
        !(self.rcond >= threshold)
    }
}

fn assemble(probs: ArrayView2<'_, f64>, diag: ArrayView2<'_, f64>, pairs: ArrayView4<'_, f64>) -> Array2<f64> {
    let (n, a) = probs.dim();
    let size = n * a + n;
    let mut c = Array2::zeros((size, size));
    c.slice_mut(s![..n * a, ..n * a]).assign(&h_block(probs, diag, pairs));
    for i in 0..n {
        for ai in 0..a {
            c[[i * a + ai, n * a + i]] = 1.0;
            c[[n * a + i, i * a + ai]] = probs[[i, ai]];
        }
    }
    c
}

/// Coefficient matrix of one state from its policy rows `[player][action]`,
/// regrets `[player][action]` and pair tensor `[i][j][a][a']`.
pub fn coefficient_matrix(
    probs: ArrayView2<'_, f64>,
    r: ArrayView2<'_, f64>,
    pairs: ArrayView4<'_, f64>,
) -> CoefficientMatrix {
    let matrix = assemble(probs, r, pairs);
    let lu = Lu::factor(&matrix);
    let rcond = lu.rcond();
    CoefficientMatrix { matrix, rcond, lu }
}

/// Differential of the bundle at one state.
#[derive(Debug, Clone)]
pub struct StateDifferential {
    /// `(dπ/π) / (dμ/μ)`, `[(j,a')][(k,a'')]`; empty when singular.
    pub dlogpi_dlogmu: Array2<f64>,
    /// `dv / (dμ/μ)`, `[l][(k,a'')]`; empty when singular.
    pub dv_dlogmu: Array2<f64>,
    /// Reciprocal condition number of the coefficient matrix.
    pub condition_estimate: f64,
    pub singular: bool,
}

/// Per-state differentials of the bundle.
#[derive(Debug, Clone)]
pub struct BundleDifferential {
    pub states: Vec<StateDifferential>,
}

impl BundleDifferential {
    pub fn is_singular(&self) -> bool {
        self.states.iter().any(|d| d.singular)
    }

    pub fn min_condition(&self) -> f64 {
        self.states.iter().map(|d| d.condition_estimate).fold(f64::INFINITY, f64::min)
    }

    /// `Δlogπ = X · Δlogμ` for every state, `[state][player][action]`.
    pub fn predict(&self, dlogmu: &Array3<f64>) -> Option<Array3<f64>> {
        let (n_states, n, a) = dlogmu.dim();
        let mut out = Array3::zeros((n_states, n, a));
        for (st, d) in self.states.iter().enumerate() {
            if d.singular {
                return None;
            }
            let flat: Vec<f64> = dlogmu.index_axis(Axis(0), st).iter().copied().collect();
            let moved = d.dlogpi_dlogmu.dot(&ArrayView1::from(&flat));
            out.index_axis_mut(Axis(0), st)
                .assign(&moved.into_shape_with_order((n, a)).expect("block shape"));
        }
        Some(out)
    }
}

/// Solves `C [X; Y] = [Diag(r); 0]` at one on-bundle state.
pub fn state_differential(
    probs: ArrayView2<'_, f64>,
    r: ArrayView2<'_, f64>,
    pairs: ArrayView4<'_, f64>,
    singular_rcond: f64,
) -> StateDifferential {
    let (n, a) = probs.dim();
    let cm = coefficient_matrix(probs, r, pairs);
    let singular = cm.is_singular(singular_rcond);
    let mut rhs = Array2::zeros((n * a + n, n * a));
    for (k, &x) in r.iter().enumerate() {
        rhs[[k, k]] = x;
    }
    match (singular, cm.lu.solve_matrix(&rhs)) {
        (false, Some(sol)) => StateDifferential {
            dlogpi_dlogmu: sol.slice(s![..n * a, ..]).to_owned(),
            dv_dlogmu: sol.slice(s![n * a.., ..]).to_owned(),
            condition_estimate: cm.rcond,
            singular: false,
        },
        _ => StateDifferential {
            dlogpi_dlogmu: Array2::zeros((0, 0)),
            dv_dlogmu: Array2::zeros((0, 0)),
            condition_estimate: cm.rcond,
            singular: true,
        },
    }
}

/// Differential of the bundle at every state, using the regrets of `dq` and
/// the pair tensor of the frozen stage utility.
pub fn bundle_differential(
    policy: &Policy,
    dq: &DualQuantities,
    pairs: &Array5<f64>,
    singular_rcond: f64,
) -> BundleDifferential {
    let states = (0..policy.dims().0)
        .map(|st| {
            state_differential(
                policy.state(st),
                dq.r.index_axis(Axis(0), st),
                pairs.index_axis(Axis(0), st),
                singular_rcond,
            )
        })
        .collect();
    BundleDifferential { states }
}

/// `μ′ = (1 − η)∘μ + β∘π` with `η` and `β` given per (state, player).
pub fn canonical_descent_step(
    mu: &BarrierParameter,
    policy: &Policy,
    eta: &Array2<f64>,
    beta: &Array2<f64>,
) -> Result<BarrierParameter> {
    let (n_states, n, _) = policy.dims();
    if mu.mu.dim() != policy.dims() || eta.dim() != (n_states, n) || beta.dim() != (n_states, n) {
        return Err(Error::Shape("barrier, policy, eta and beta dimensions disagree".into()));
    }
    if let Some(e) = eta.iter().find(|e| !(0.0..1.0).contains(*e)) {
        return Err(Error::Argument(format!("eta must lie in [0, 1), got {e}")));
    }
    if let Some(b) = beta.iter().find(|b| !(**b >= 0.0)) {
        return Err(Error::Argument(format!("beta must be nonnegative, got {b}")));
    }
    let mut next = mu.mu.clone();
    for ((st, i, a), x) in next.indexed_iter_mut() {
        *x = (1.0 - eta[[st, i]]) * *x + beta[[st, i]] * policy.probs()[[st, i, a]];
    }
    Ok(BarrierParameter { mu: next })
}

/// Starting barrier `μ = μ′ π`, close to the fiber over `π` for large `μ′`.
pub fn initial_barrier(policy: &Policy, mu_prime: f64) -> Result<BarrierParameter> {
    if !(mu_prime > 0.0 && mu_prime.is_finite()) {
        return Err(Error::Argument(format!("mu_prime must be positive, got {mu_prime}")));
    }
    if !policy.is_interior() {
        return Err(Error::Argument("initial barrier needs a strictly interior policy".into()));
    }
    Ok(BarrierParameter { mu: policy.probs() * mu_prime })
}

/// Pair tensor and deviation utilities of one stage game, `[state]`-stacked.
pub fn stage_contractions(game: &DynamicGame, policy: &Policy, stage: &Array3<f64>) -> Result<(Array3<f64>, Array5<f64>)> {
    let dev = deviation_utility(game, policy, stage)?;
    let pairs = crate::contract::deviation_utility_pairs(game, policy, stage)?;
    Ok((dev, pairs))
}
