//! Slow reference implementations for tests and cross-checks.
//!
//! Nothing on the solver path calls into this module. Contractions here loop
//! over explicit action profiles rather than folding axes, value iteration
//! uses the Bellman max operator, and the Nash scan searches a grid.

use ndarray::{Array2, Array3, Array5};

use crate::error::{Error, Result};
use crate::game::{DynamicGame, Policy, ValueFunction};
use crate::linalg::Lu;

/// Largest `states · joint actions · players²` the brute-force contractions accept.
pub const BRUTE_FORCE_CAP: usize = 1_000_000;

/// Joint probabilities `[state][joint]`, deviation utilities and pair
/// utilities, each computed by enumerating every action profile.
pub fn brute_force_contractions(
    game: &DynamicGame,
    policy: &Policy,
    stage: &Array3<f64>,
) -> Result<(Array2<f64>, Array3<f64>, Array5<f64>)> {
    let (n, a, n_states, n_joint) = (game.n_players(), game.n_actions(), game.n_states(), game.n_joint());
    let work = n_states * n_joint * n * n;
    if work > BRUTE_FORCE_CAP {
        return Err(Error::Refused(format!("{work} profile visits exceed the brute-force cap")));
    }
    if policy.dims() != (n_states, n, a) || stage.dim() != (n_states, n_joint, n) {
        return Err(Error::Shape("policy or stage utility does not match the game".into()));
    }
    let probs = policy.probs();
    let mut joint = Array2::zeros((n_states, n_joint));
    let mut dev = Array3::zeros((n_states, n, a));
    let mut pairs = Array5::zeros((n_states, n, n, a, a));
    for s in 0..n_states {
        for jt in 0..n_joint {
            let profile = game.joint_actions(jt);
            let weight = |skip: &[usize]| -> f64 {
                (0..n).filter(|k| !skip.contains(k)).map(|k| probs[[s, k, profile[k]]]).product()
            };
            joint[[s, jt]] = weight(&[]);
            for i in 0..n {
                dev[[s, i, profile[i]]] += weight(&[i]) * stage[[s, jt, i]];
                for j in (0..n).filter(|&j| j != i) {
                    pairs[[s, i, j, profile[i], profile[j]]] += weight(&[i, j]) * stage[[s, jt, i]];
                }
            }
        }
    }
    Ok((joint, dev, pairs))
}

/// Bellman iteration for a single-player game, stopped once
/// `‖ΔV‖∞ < tol (1 − γ) / γ`. The greedy policy takes the lowest index on ties.
pub fn value_iteration(game: &DynamicGame, tol: f64) -> Result<(ValueFunction, Policy)> {
    if game.n_players() != 1 {
        return Err(Error::Argument(format!("value iteration needs one player, game has {}", game.n_players())));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let (n_states, a, gamma) = (game.n_states(), game.n_actions(), game.gamma());
    let q = |v: &[f64], s: usize, b: usize| -> f64 {
        let next: f64 = (0..n_states).map(|t| game.transition()[[s, b, t]] * v[t]).sum();
        game.utility()[[s, b, 0]] + gamma * next
    };
    let threshold = if gamma > 0.0 { tol * (1.0 - gamma) / gamma } else { f64::INFINITY };
    let mut v = vec![0.0; n_states];
    loop {
        let next: Vec<f64> = (0..n_states)
            .map(|s| (0..a).map(|b| q(&v, s, b)).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let change = v.iter().zip(&next).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        v = next;
        if change < threshold {
            break;
        }
    }
    let mut probs = Array3::zeros((n_states, 1, a));
    for s in 0..n_states {
        let mut best = 0;
        for b in 1..a {
            if q(&v, s, b) > q(&v, s, best) {
                best = b;
            }
        }
        probs[[s, 0, best]] = 1.0;
    }
    let values = Array2::from_shape_vec((n_states, 1), v).expect("column shape");
    Ok((ValueFunction { values }, Policy::from_probs(probs)?))
}

/// Result of a grid search for Nash equilibria of a two-player static game.
#[derive(Debug, Clone)]
pub struct GridScan {
    /// Distinct approximate equilibria, lowest gap first.
    pub equilibria: Vec<Policy>,
    /// Best-response gap of each entry of `equilibria`.
    pub gaps: Vec<f64>,
    /// Every grid point has a gap below the tolerance, so there is no count.
    pub degenerate: bool,
}

impl GridScan {
    pub fn count(&self) -> Option<usize> {
        (!self.degenerate).then_some(self.equilibria.len())
    }
}

/// Lattice points of the simplex with `divisions` steps per coordinate.
fn simplex_grid(n_actions: usize, divisions: usize) -> Vec<Vec<usize>> {
    fn fill(prefix: &mut Vec<usize>, left: usize, slots: usize, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            fill(prefix, left - k, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    fill(&mut Vec::new(), divisions, n_actions, &mut out);
    out
}

/// `max_i (max_a devU_i − Σ_a π devU_i)` of a two-player static game.
fn nash_gap(payoff: &Array3<f64>, x: &[f64], y: &[f64]) -> f64 {
    let a = x.len();
    let mut gap = 0.0_f64;
    for (me, mine, theirs) in [(0, x, y), (1, y, x)] {
        let dev: Vec<f64> = (0..a)
            .map(|b| {
                (0..a)
                    .map(|c| {
                        let jt = if me == 0 { b * a + c } else { c * a + b };
                        theirs[c] * payoff[[0, jt, me]]
                    })
                    .sum()
            })
            .collect();
        let best = dev.iter().fold(f64::NEG_INFINITY, |m, &d| m.max(d));
        let avg: f64 = dev.iter().zip(mine).map(|(d, p)| d * p).sum();
        gap = gap.max(best - avg);
    }
    gap
}

/// Pattern search on mass transfers between actions, halving the step.
fn refine(payoff: &Array3<f64>, mut x: Vec<f64>, mut y: Vec<f64>, step: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let a = x.len();
    let mut best = nash_gap(payoff, &x, &y);
    let mut delta = step;
    while delta > 1e-13 {
        let mut improved = false;
        for player in 0..2 {
            for from in 0..a {
                for to in (0..a).filter(|&t| t != from) {
                    let cur = if player == 0 { &x } else { &y };
                    let moved = delta.min(cur[from]);
                    if moved <= 0.0 {
                        continue;
                    }
                    let mut trial = cur.clone();
                    trial[from] -= moved;
                    trial[to] += moved;
                    let gap = if player == 0 { nash_gap(payoff, &trial, &y) } else { nash_gap(payoff, &x, &trial) };
                    if gap < best {
                        best = gap;
                        if player == 0 {
                            x = trial;
                        } else {
                            y = trial;
                        }
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }
    (x, y, best)
}

/// Mixed profile with the supports of `x` and `y` that makes each player
/// indifferent across their own support, if one exists.
fn support_solve(payoff: &Array3<f64>, x: &[f64], y: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let a = x.len();
    let sx: Vec<usize> = (0..a).filter(|&b| x[b] > 0.0).collect();
    let sy: Vec<usize> = (0..a).filter(|&b| y[b] > 0.0).collect();
    if sx.len() != sy.len() {
        return None;
    }
    // the opponent mix on `theirs` that equalizes `me` across `mine`
    let equalize = |me: usize, mine: &[usize], theirs: &[usize]| -> Option<Vec<f64>> {
        let k = mine.len();
        let u = |b: usize, c: usize| {
            let jt = if me == 0 { b * a + c } else { c * a + b };
            payoff[[0, jt, me]]
        };
        let mut system = Array2::zeros((k, k));
        let mut rhs = vec![0.0; k];
        for j in 1..k {
            for (col, &c) in theirs.iter().enumerate() {
                system[[j - 1, col]] = u(mine[j], c) - u(mine[0], c);
            }
        }
        system.row_mut(k - 1).fill(1.0);
        rhs[k - 1] = 1.0;
        let q = Lu::factor(&system).solve(&rhs)?;
        if q.iter().any(|&p| p < -1e-12) {
            return None;
        }
        let mut full = vec![0.0; a];
        for (col, &c) in theirs.iter().enumerate() {
            full[c] = q[col].max(0.0);
        }
        Some(full)
    };
    let y_new = equalize(0, &sx, &sy)?;
    let x_new = equalize(1, &sy, &sx)?;
    Some((x_new, y_new))
}

/// Scans a two-player, one-state game with at most three actions on a
/// simplex grid of `divisions` steps per coordinate. Grid points with a small
/// best-response gap are refined by solving the indifference equations on
/// their supports, and grid local minima by pattern search. Refined points
/// below `refine_tol` are clustered, treating points within ten grid steps as
/// one.
pub fn grid_nash_scan(game: &DynamicGame, divisions: usize, refine_tol: f64) -> Result<GridScan> {
    if game.n_players() != 2 || game.n_states() != 1 || game.n_actions() > 3 {
        return Err(Error::Argument("grid scan needs a one-state, two-player game with at most 3 actions".into()));
    }
    if divisions == 0 || !(refine_tol > 0.0) {
        return Err(Error::Argument("divisions and refine_tol must be positive".into()));
    }
    let a = game.n_actions();
    let step = 1.0 / divisions as f64;
    let payoff = game.utility();
    let lattice = simplex_grid(a, divisions);
    let index: std::collections::HashMap<Vec<usize>, usize> =
        lattice.iter().enumerate().map(|(k, p)| (p.clone(), k)).collect();
    let point = |p: &[usize]| -> Vec<f64> { p.iter().map(|&k| k as f64 * step).collect() };
    let pts: Vec<Vec<f64>> = lattice.iter().map(|p| point(p)).collect();
    let m = lattice.len();
    let gaps: Vec<f64> = (0..m * m).map(|k| nash_gap(payoff, &pts[k / m], &pts[k % m])).collect();
    if gaps.iter().all(|&g| g < refine_tol) {
        return Ok(GridScan { equilibria: Vec::new(), gaps: Vec::new(), degenerate: true });
    }
    let neighbors = |k: usize| -> Vec<usize> {
        let mut out = Vec::new();
        let p = &lattice[k];
        for from in 0..a {
            for to in (0..a).filter(|&t| t != from) {
                if p[from] == 0 {
                    continue;
                }
                let mut q = p.clone();
                q[from] -= 1;
                q[to] += 1;
                out.push(index[&q]);
            }
        }
        out
    };
    let (lo, hi) = payoff.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &u| (l.min(u), h.max(u)));
    let coarse = 2.0 * a as f64 * step * (hi - lo);
    let mut candidates = Vec::new();
    for kx in 0..m {
        for ky in 0..m {
            let g = gaps[kx * m + ky];
            if g <= coarse {
                if let Some((x, y)) = support_solve(payoff, &pts[kx], &pts[ky]) {
                    let gap = nash_gap(payoff, &x, &y);
                    if gap < refine_tol {
                        candidates.push((gap, x, y));
                    }
                }
            }
            let local_min = neighbors(kx).iter().all(|&nx| g <= gaps[nx * m + ky])
                && neighbors(ky).iter().all(|&ny| g <= gaps[kx * m + ny]);
            if local_min {
                let (x, y, gap) = refine(payoff, pts[kx].clone(), pts[ky].clone(), step);
                if gap < refine_tol {
                    candidates.push((gap, x, y));
                }
            }
        }
    }
    candidates.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut kept: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
    for (gap, x, y) in candidates {
        let far = kept.iter().all(|(_, kx, ky)| {
            let d = kx.iter().zip(&x).chain(ky.iter().zip(&y)).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
            d > 10.0 * step
        });
        if far {
            kept.push((gap, x, y));
        }
    }
    let mut equilibria = Vec::with_capacity(kept.len());
    let mut out_gaps = Vec::with_capacity(kept.len());
    for (gap, x, y) in kept {
        let probs = Array3::from_shape_fn((1, 2, a), |(_, i, b)| if i == 0 { x[b] } else { y[b] });
        equilibria.push(Policy::from_probs(probs)?);
        out_gaps.push(gap);
    }
    Ok(GridScan { equilibria, gaps: out_gaps, degenerate: false })
}

/// Central difference `(f(x + h d) − f(x − h d)) / 2h`.
pub fn finite_difference_directional<F>(f: F, point: &Array3<f64>, direction: &Array3<f64>, h: f64) -> Result<f64>
where
    F: Fn(&Array3<f64>) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::Argument(format!("step must be positive, got {h}")));
    }
    if point.dim() != direction.dim() {
        return Err(Error::Shape("point and direction differ in shape".into()));
    }
    let plus = point + &(direction * h);
    let minus = point - &(direction * h);
    Ok((f(&plus) - f(&minus)) / (2.0 * h))
}
