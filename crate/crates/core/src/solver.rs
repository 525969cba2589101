//! Two-level path following on the equilibrium bundle.
//!
//! The inner loop pulls `(π, V)` back onto the bundle over a fixed barrier
//! `μ` while running shifted dynamic programming on `V`. The outer loop
//! shrinks `μ` and predicts the new policy with the bundle differential.
//! The solve stops once the canonical section at the exact policy value is
//! below `ε` everywhere.

use ndarray::{Array1, Array2, Array3, Array4, Array5, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::bundle::{
    bundle_differential, canonical_descent_step, canonical_section,
    canonical_section_from_deviation, dual_quantities_from_deviation, initial_barrier, projected_gradient,
    unbiased_objective, DualQuantities,
};
use crate::contract::{deviation_transition, deviation_utility, deviation_utility_pairs, stage_utility};
use crate::linalg::Lu;
use crate::dp::policy_value;
use crate::error::{Error, Result};
use crate::game::{BarrierParameter, DynamicGame, Policy, ValueFunction};

/// Largest logit move of one outer prediction, in ∞-norm.
pub const TRUST_RADIUS: f64 = 0.5;

/// Largest logit move of one inner correction, in ∞-norm.
pub const CORRECTION_RADIUS: f64 = 1.0;

/// Inner steps allowed after a hop before the hop is retried shorter.
pub const RETRY_BUDGET: usize = 60;

/// Smallest outer step, relative to the configured `eta`, before a fiber lift.
pub const MIN_ETA_FRACTION: f64 = 1.0 / 1024.0;

/// Fiber escalations tolerated before giving up on a singular differential.
pub const MAX_ESCALATIONS: u32 = 8;

/// How the inner loop moves the logits toward the bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InnerStep {
    /// Joint Newton correction of logits and values through the bundle
    /// coefficient matrix, falling back to the gradient step when singular.
    #[default]
    Newton,
    /// `logits ← logits − step_size · pg / (π∘r)` with the plain DP update of
    /// `V`. Converges, but needs thousands of steps per hop beyond tiny games.
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    /// Initial barrier scale, multiplied by `‖u‖∞`.
    pub mu_prime_factor: f64,
    /// DP shift scale, multiplied by `‖u‖∞ / (1 − γ)`.
    pub m_factor: f64,
    pub eta: f64,
    pub step_size: f64,
    pub inner_tol_bias: f64,
    /// Radians.
    pub inner_tol_angle: f64,
    pub outer_tol_eps: f64,
    pub max_inner: usize,
    pub max_outer: usize,
    pub singular_rcond: f64,
    pub seed: u64,
    pub inner_step: InnerStep,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            mu_prime_factor: 1e3,
            m_factor: 1.0,
            eta: 0.1,
            step_size: 0.2,
            inner_tol_bias: 1e-8,
            inner_tol_angle: 1e-6,
            outer_tol_eps: 1e-4,
            max_inner: 50_000,
            max_outer: 5_000,
            singular_rcond: 1e-10,
            seed: 0,
            inner_step: InnerStep::Newton,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu_prime_factor", self.mu_prime_factor),
            ("step_size", self.step_size),
            ("inner_tol_bias", self.inner_tol_bias),
            ("inner_tol_angle", self.inner_tol_angle),
            ("outer_tol_eps", self.outer_tol_eps),
            ("singular_rcond", self.singular_rcond),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Argument(format!("{name} must be positive, got {x}")));
            }
        }
        if !(self.m_factor >= 0.0 && self.m_factor.is_finite()) {
            return Err(Error::Argument(format!("m_factor must be nonnegative, got {}", self.m_factor)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Argument(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if self.max_inner == 0 || self.max_outer == 0 {
            return Err(Error::Argument("max_inner and max_outer must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIterations,
    NumericalFailure,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max_iterations",
            Status::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    pub policy: Policy,
    /// Exact value of `policy`.
    pub value: ValueFunction,
    /// `‖canonical_section(policy, value)‖∞`
    pub eps_achieved: f64,
    pub inner_steps_total: usize,
    pub outer_steps_total: usize,
}

/// One line of the iteration trace.
///
/// Inner steps carry `inner_index ≥ 1`, counted within the current outer
/// iteration, and measure the working stage game. The record closing an outer
/// step has `inner_index = 0` and measures the exact policy value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub outer_index: usize,
    pub inner_index: usize,
    pub bias_norm: f64,
    pub objective: f64,
    pub angle: f64,
    pub canosec_norm: f64,
    pub mu_norm: f64,
}

/// Outcome of one phase of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Done,
    MaxIterations,
    NumericalFailure,
}

/// Solver iterate with the contractions of its working stage game.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub policy: Policy,
    pub mu: BarrierParameter,
    /// Working value, without the shift.
    pub values: ValueFunction,
    /// Per-player DP shift `m`.
    pub shift: Vec<f64>,
    /// `[state][player][action]` at the working stage game.
    pub dev: Array3<f64>,
    pub pairs: Array5<f64>,
    /// Next-state law under unilateral deviations, `[state][player][action][next]`.
    pub dev_next: Array4<f64>,
    pub dual: DualQuantities,
    pub outer_index: usize,
    pub inner_steps_total: usize,
    pub outer_steps_total: usize,
    pub trace: Vec<TraceRecord>,
    escalations: u32,
}

impl SolverState {
    /// Starting point: `μ = μ′ π`, `V = m·1`.
    pub fn new(game: &DynamicGame, cfg: &SolveConfig, start: Option<&Policy>) -> Result<Self> {
        cfg.validate()?;
        let policy = match start {
            None => Policy::uniform_for(game),
            Some(p) => {
                game.check_policy(p)?;
                interior_start(p)
            }
        };
        let scale = game.utility_scale();
        let mu = initial_barrier(&policy, cfg.mu_prime_factor * scale)?;
        let m = cfg.m_factor * scale / (1.0 - game.gamma());
        let shift = vec![m; game.n_players()];
        let values = ValueFunction { values: Array2::from_elem((game.n_states(), game.n_players()), m) };
        let mut state = Self {
            policy,
            mu,
            values,
            shift,
            dev: Array3::zeros((0, 0, 0)),
            pairs: Array5::zeros((0, 0, 0, 0, 0)),
            dev_next: Array4::zeros((0, 0, 0, 0)),
            dual: DualQuantities {
                v: Array2::zeros((0, 0)),
                r: Array3::zeros((0, 0, 0)),
                pi_hat: Array3::zeros((0, 0, 0)),
                r_hat: Array3::zeros((0, 0, 0)),
            },
            outer_index: 0,
            inner_steps_total: 0,
            outer_steps_total: 0,
            trace: Vec::new(),
            escalations: 0,
        };
        state.refresh(game)?;
        Ok(state)
    }

    /// Recomputes the stage game at `V + m·1` and everything derived from it.
    pub fn refresh(&mut self, game: &DynamicGame) -> Result<()> {
        let stage = stage_utility(game, &self.values.shifted(&self.shift))?;
        self.dev = deviation_utility(game, &self.policy, &stage)?;
        self.pairs = deviation_utility_pairs(game, &self.policy, &stage)?;
        self.dev_next = deviation_transition(game, &self.policy)?;
        self.dual = dual_quantities_from_deviation(&self.policy, &self.mu, &self.dev)?;
        Ok(())
    }

    fn logits(&self) -> Array3<f64> {
        match self.policy.logits() {
            Some(l) => l.clone(),
            None => self.policy.probs().mapv(f64::ln),
        }
    }

    fn move_logits(&mut self, delta: &Array3<f64>) {
        let mut logits = self.logits() + delta;
        for mut row in logits.lanes_mut(Axis(2)) {
            let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
            row.mapv_inplace(|x| x - max);
        }
        self.policy = Policy::from_logits(logits);
    }
}

/// Mixes a boundary policy with a sliver of uniform play.
fn interior_start(policy: &Policy) -> Policy {
    if let Ok(p) = policy.to_interior() {
        return p;
    }
    log::warn!("starting policy has zero entries; mixing in 1e-8 of uniform play");
    let a = policy.dims().2 as f64;
    let mixed = policy.probs().mapv(|p| (1.0 - 1e-8) * p + 1e-8 / a);
    Policy::from_logits(mixed.mapv(f64::ln))
}

fn clip_inf(delta: &mut Array3<f64>, radius: f64) {
    let norm = delta.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if norm > radius {
        *delta *= radius / norm;
    }
}

/// Largest angle between `dV_i` and `1` over players, as unsigned lines.
fn max_angle(dv: &Array2<f64>, scale: f64) -> f64 {
    let n_states = dv.nrows() as f64;
    dv.columns()
        .into_iter()
        .map(|col| {
            let norm = col.dot(&col).sqrt();
            if norm < 1e-14 * scale {
                return 0.0;
            }
            let cos = (col.sum().abs() / (norm * n_states.sqrt())).min(1.0);
            // acos loses half the digits near 1; use the sine form instead
            let sin = (1.0 - cos * cos).max(0.0).sqrt();
            sin.atan2(cos)
        })
        .fold(0.0, f64::max)
}

fn max_abs(a: &Array3<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `‖canonical_section(π, policy_value(π))‖∞`
pub fn exact_canosec_norm(game: &DynamicGame, policy: &Policy) -> Result<f64> {
    let v = policy_value(game, policy)?;
    Ok(canonical_section(game, policy, &v)?.max_norm())
}

/// Runs inner steps until `(π, μ)` is on the bundle and `dV` is parallel to `1`.
pub fn inner_converge(game: &DynamicGame, state: &mut SolverState, cfg: &SolveConfig) -> Result<Phase> {
    inner_converge_within(game, state, cfg, cfg.max_inner)
}

fn inner_converge_within(game: &DynamicGame, state: &mut SolverState, cfg: &SolveConfig, budget: usize) -> Result<Phase> {
    let single_state = game.n_states() == 1;
    let mut k = 0;
    loop {
        state.refresh(game)?;
        let on_policy = (&state.dev * state.policy.probs()).sum_axis(Axis(2));
        let dv = &on_policy - &state.values.values;
        let bias_norm = state.dual.bias_norm(&state.policy);
        let regret_gap = state.dual.regret_bias_norm();
        let r_scale = max_abs(&state.dual.r).max(game.utility_scale());
        let v_scale = state.values.values.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        let angle = if single_state { 0.0 } else { max_angle(&dv, v_scale) };
        k += 1;
        state.inner_steps_total += 1;
        state.trace.push(TraceRecord {
            outer_index: state.outer_index,
            inner_index: k,
            bias_norm,
            objective: unbiased_objective(&state.policy, &state.dual),
            angle,
            canosec_norm: canonical_section_from_deviation(&state.policy, &state.dev).max_norm(),
            mu_norm: state.mu.max_norm(),
        });
        if bias_norm < cfg.inner_tol_bias
            && regret_gap < cfg.inner_tol_bias * r_scale
            && angle < cfg.inner_tol_angle
        {
            return Ok(Phase::Done);
        }
        if k >= budget {
            log::debug!(
                "inner loop hit {} steps at outer {} (bias {bias_norm:.3e}, angle {angle:.3e})",
                budget,
                state.outer_index
            );
            return Ok(Phase::MaxIterations);
        }
        let newton = match cfg.inner_step {
            InnerStep::Newton => joint_correction(game, state, &dv, cfg.singular_rcond),
            InnerStep::Gradient => None,
        };
        match newton {
            Some((mut delta, mut dvalue)) => {
                let norm = delta.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                if norm > CORRECTION_RADIUS {
                    delta *= CORRECTION_RADIUS / norm;
                    dvalue *= CORRECTION_RADIUS / norm;
                }
                state.move_logits(&delta);
                state.values.values += &dvalue;
            }
            None => {
                let pg = projected_gradient(&state.policy, &state.dual, &state.pairs);
                let curvature = &state.dual.r * state.policy.probs();
                let mut delta = pg / curvature * -cfg.step_size;
                clip_inf(&mut delta, CORRECTION_RADIUS);
                state.move_logits(&delta);
                state.values.values = on_policy;
            }
        }
    }
}

/// Newton step for the inner fixed point in `(logits, V)` jointly.
///
/// Unknowns per state are the logit moves `y[i][a]`, the dual-value moves and
/// the value moves `dV[i]`. The rows linearize `π = μ/r` (with the
/// continuation values inside `r`), the gauge `Σ_a π y = 0`, and
/// `V = Σ_a π devU`. Returns `None` if the system is numerically singular.
fn joint_correction(
    game: &DynamicGame,
    state: &SolverState,
    residual: &Array2<f64>,
    singular_rcond: f64,
) -> Option<(Array3<f64>, Array2<f64>)> {
    let (n_states, n, a) = state.policy.dims();
    let gamma = game.gamma();
    let block = n * a + 2 * n;
    let size = n_states * block;
    let y = |s: usize, i: usize, b: usize| s * block + i * a + b;
    let dual = |s: usize, i: usize| s * block + n * a + i;
    let val = |s: usize, i: usize| s * block + n * a + n + i;
    let p = state.policy.probs();
    let dq = &state.dual;
    let mut c = Array2::<f64>::zeros((size, size));
    let mut rhs = vec![0.0; size];
    for s in 0..n_states {
        for i in 0..n {
            for ai in 0..a {
                let row = y(s, i, ai);
                let (r, ph) = (dq.r[[s, i, ai]], dq.pi_hat[[s, i, ai]]);
                c[[row, row]] = r * p[[s, i, ai]] / ph;
                for j in (0..n).filter(|&j| j != i) {
                    for b in 0..a {
                        c[[row, y(s, j, b)]] = -state.pairs[[s, i, j, ai, b]] * p[[s, j, b]];
                    }
                }
                c[[row, dual(s, i)]] = 1.0;
                for next in 0..n_states {
                    c[[row, val(next, i)]] -= gamma * state.dev_next[[s, i, ai, next]];
                }
                rhs[row] = -(r / ph) * (p[[s, i, ai]] - ph);

                c[[dual(s, i), row]] = p[[s, i, ai]];

                let vrow = val(s, i);
                c[[vrow, row]] = -p[[s, i, ai]] * state.dev[[s, i, ai]];
                for j in (0..n).filter(|&j| j != i) {
                    for b in 0..a {
                        c[[vrow, y(s, j, b)]] -= p[[s, i, ai]] * state.pairs[[s, i, j, ai, b]] * p[[s, j, b]];
                    }
                }
                for next in 0..n_states {
                    c[[vrow, val(next, i)]] -= gamma * p[[s, i, ai]] * state.dev_next[[s, i, ai, next]];
                }
            }
            c[[val(s, i), val(s, i)]] += 1.0;
            rhs[val(s, i)] = residual[[s, i]];
        }
    }
    let lu = Lu::factor(&c);
    if lu.rcond() < singular_rcond {
        return None;
    }
    let sol: Array1<f64> = lu.solve(&rhs)?;
    let delta = Array3::from_shape_fn((n_states, n, a), |(s, i, b)| sol[y(s, i, b)]);
    let dvalue = Array2::from_shape_fn((n_states, n), |(s, i)| sol[val(s, i)]);
    Some((delta, dvalue))
}

/// One hop to a neighboring fiber, or a fiber lift when the differential is singular.
pub fn outer_step(game: &DynamicGame, state: &mut SolverState, cfg: &SolveConfig) -> Result<Phase> {
    outer_step_with(game, state, cfg, cfg.eta, false)
}

fn outer_step_with(
    game: &DynamicGame,
    state: &mut SolverState,
    cfg: &SolveConfig,
    eta: f64,
    force_lift: bool,
) -> Result<Phase> {
    state.outer_steps_total += 1;
    let canosec_norm = exact_canosec_norm(game, &state.policy)?;
    let record = TraceRecord {
        outer_index: state.outer_index,
        inner_index: 0,
        bias_norm: state.dual.bias_norm(&state.policy),
        objective: unbiased_objective(&state.policy, &state.dual),
        angle: 0.0,
        canosec_norm,
        mu_norm: state.mu.max_norm(),
    };
    state.outer_index += 1;
    let (n_states, n, a) = state.policy.dims();
    let prediction = if force_lift {
        None
    } else {
        let diff = bundle_differential(&state.policy, &state.dual, &state.pairs, cfg.singular_rcond);
        if diff.is_singular() {
            log::debug!("singular differential (rcond {:.3e}), lifting along the fiber", diff.min_condition());
        }
        diff.predict(&Array3::from_elem((n_states, n, a), -eta))
    };
    let phase = match prediction {
        Some(mut dlogpi) => {
            state.escalations = 0;
            let eta = Array2::from_elem((n_states, n), eta);
            state.mu = canonical_descent_step(&state.mu, &state.policy, &eta, &Array2::zeros((n_states, n)))?;
            clip_inf(&mut dlogpi, TRUST_RADIUS);
            state.move_logits(&dlogpi);
            Phase::Done
        }
        None => {
            state.escalations += 1;
            if state.escalations > MAX_ESCALATIONS {
                Phase::NumericalFailure
            } else {
                let factor = 0.5 * f64::powi(2.0, state.escalations as i32 - 1) / a as f64;
                let beta = state.mu.mu.sum_axis(Axis(2)) * factor;
                state.mu = canonical_descent_step(&state.mu, &state.policy, &Array2::zeros((n_states, n)), &beta)?;
                Phase::Done
            }
        }
    };
    state.trace.push(TraceRecord { mu_norm: state.mu.max_norm(), ..record });
    Ok(phase)
}

/// Solves from the uniform policy.
pub fn solve(game: &DynamicGame, cfg: &SolveConfig) -> Result<(SolveResult, Vec<TraceRecord>)> {
    run(game, cfg, None)
}

/// Solves from a supplied starting policy; zero entries are lifted slightly.
pub fn solve_from(game: &DynamicGame, cfg: &SolveConfig, start: &Policy) -> Result<(SolveResult, Vec<TraceRecord>)> {
    run(game, cfg, Some(start))
}

/// Point to return to when a prediction lands outside the corrector's reach.
struct Checkpoint {
    policy: Policy,
    mu: BarrierParameter,
    values: ValueFunction,
    escalations: u32,
}

fn run(game: &DynamicGame, cfg: &SolveConfig, start: Option<&Policy>) -> Result<(SolveResult, Vec<TraceRecord>)> {
    let mut state = SolverState::new(game, cfg, start)?;
    // Newton corrections settle in a handful of steps; a long stall means the
    // prediction overshot, so the hop is retried shorter.
    let retry_budget = match cfg.inner_step {
        InnerStep::Newton => cfg.max_inner.min(RETRY_BUDGET),
        InnerStep::Gradient => cfg.max_inner,
    };
    let mut eta = cfg.eta;
    let mut checkpoint: Option<Checkpoint> = None;
    let status = loop {
        let budget = if checkpoint.is_some() { retry_budget } else { cfg.max_inner };
        match inner_converge_within(game, &mut state, cfg, budget)? {
            Phase::Done => {}
            Phase::NumericalFailure => break Status::NumericalFailure,
            Phase::MaxIterations => {
                let Some(cp) = checkpoint.as_ref() else { break Status::MaxIterations };
                if state.outer_steps_total >= cfg.max_outer {
                    break Status::MaxIterations;
                }
                state.policy = cp.policy.clone();
                state.mu = cp.mu.clone();
                state.values = cp.values.clone();
                state.escalations = cp.escalations;
                state.refresh(game)?;
                eta *= 0.25;
                let lift = eta < cfg.eta * MIN_ETA_FRACTION;
                if lift {
                    eta = cfg.eta;
                }
                log::debug!("correction stalled; retrying from outer {} with eta {eta:.3e}", state.outer_index);
                if outer_step_with(game, &mut state, cfg, eta, lift)? == Phase::NumericalFailure {
                    break Status::NumericalFailure;
                }
                continue;
            }
        }
        if checkpoint.is_some() {
            eta = (2.0 * eta).min(cfg.eta);
        }
        let eps = exact_canosec_norm(game, &state.policy)?;
        log::debug!("outer {}: canonical section {eps:.3e}, mu {:.3e}", state.outer_index, state.mu.max_norm());
        if eps < cfg.outer_tol_eps {
            break Status::Converged;
        }
        if state.outer_steps_total >= cfg.max_outer {
            break Status::MaxIterations;
        }
        checkpoint = Some(Checkpoint {
            policy: state.policy.clone(),
            mu: state.mu.clone(),
            values: state.values.clone(),
            escalations: state.escalations,
        });
        if outer_step_with(game, &mut state, cfg, eta, false)? == Phase::NumericalFailure {
            break Status::NumericalFailure;
        }
    };
    let value = policy_value(game, &state.policy)?;
    let eps_achieved = canonical_section(game, &state.policy, &value)?.max_norm();
    log::info!(
        "{} after {} outer / {} inner steps, eps {eps_achieved:.3e}",
        status.as_str(),
        state.outer_steps_total,
        state.inner_steps_total
    );
    let result = SolveResult {
        status,
        policy: state.policy,
        value,
        eps_achieved,
        inner_steps_total: state.inner_steps_total,
        outer_steps_total: state.outer_steps_total,
    };
    Ok((result, state.trace))
}

/// Checks `μ̄(π, V_π) < eps` elementwise and returns `μ̄`.
///
/// The test weights each action's regret by its probability, so an action
/// played with tiny mass may carry a large regret. This is weaker than the
/// usual unweighted ε-Nash condition.
pub fn verify_epsilon_equilibrium(game: &DynamicGame, policy: &Policy, eps: f64) -> Result<(bool, BarrierParameter)> {
    let v = policy_value(game, policy)?;
    let mu = canonical_section(game, policy, &v)?;
    Ok((mu.mu.iter().all(|&x| x < eps), mu))
}

/// Position and size of the largest canonical-section entry.
pub fn worst_violation(mu: &BarrierParameter) -> ((usize, usize, usize), f64) {
    mu.mu
        .indexed_iter()
        .fold(((0, 0, 0), f64::NEG_INFINITY), |best, (idx, &x)| if x > best.1 { (idx, x) } else { best })
}

/// Policies with Dirichlet(1) rows ranked by their exact canonical-section norm.
pub fn scan_policy_space(game: &DynamicGame, n_samples: usize, seed: u64) -> Result<Vec<(Policy, f64)>> {
    if n_samples == 0 {
        return Err(Error::Argument("n_samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = (game.n_states(), game.n_players(), game.n_actions());
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let mut probs = Array3::from_shape_fn(dims, |_| Exp1.sample(&mut rng));
        for mut row in probs.lanes_mut(Axis(2)) {
            let total: f64 = row.sum();
            row /= total;
        }
        let policy = Policy::from_probs(probs)?;
        let norm = exact_canosec_norm(game, &policy)?;
        out.push((policy, norm));
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(out)
}
