//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use bundle_solve::bundle::{
    bundle_differential, canonical_section, dual_quantities, dual_quantities_from_deviation, projected_gradient,
};
use bundle_solve::cli::{run_batch, BatchArgs, ConfigArgs, ShapeArgs};
use bundle_solve::contract::{deviation_utility, deviation_utility_pairs, joint_policy_prob, stage_utility};
use bundle_solve::dp::{apply_d, apply_dhat, dp_step, policy_value};
use bundle_solve::oracles::{brute_force_contractions, finite_difference_directional, grid_nash_scan, value_iteration};
use bundle_solve::{
    generate_random_game, solve, verify_epsilon_equilibrium, BarrierParameter, DynamicGame, Policy, SolveConfig,
    SolveResult, Status, ValueFunction,
};
use common::*;
use ndarray::{Array3, Axis};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Converged results gathered along the way for the soundness check.
#[derive(Default)]
struct Ledger {
    converged: Vec<(DynamicGame, SolveResult, f64)>,
}

fn contraction_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(1);
    let mut worst = 0.0_f64;
    for k in 0..100u64 {
        let (n, s, a) = (1 + (k % 3) as usize, 1 + ((k / 3) % 3) as usize, 1 + ((k / 9) % 3) as usize);
        let game = generate_random_game(n, s, a, 0.6, k).unwrap();
        let policy = random_policy(&mut rng, (s, n, a));
        let stage = stage_utility(&game, &random_values(&mut rng, s, n)).unwrap();
        let (joint, dev, pairs) = brute_force_contractions(&game, &policy, &stage).unwrap();
        let fast_pairs = deviation_utility_pairs(&game, &policy, &stage).unwrap();
        worst = worst
            .max(max_abs_diff3(&joint.insert_axis(Axis(2)), &joint_policy_prob(&game, &policy).unwrap().insert_axis(Axis(2))))
            .max(max_abs_diff3(&dev, &deviation_utility(&game, &policy, &stage).unwrap()))
            .max(pairs.iter().zip(fast_pairs.iter()).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs())));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-12 && secs < 10.0, format!("max deviation {worst:.2e} over 100 games, {secs:.2}s"))
}

fn mdp_degeneration(ledger: &mut Ledger) -> Outcome {
    let start = Instant::now();
    let eps = 1e-8;
    let cfg = SolveConfig { outer_tol_eps: eps, ..Default::default() };
    let (mut worst_v, mut greedy_ok, mut all_converged) = (0.0_f64, true, true);
    for seed in 0..50 {
        let game = generate_random_game(1, 5, 3, 0.9, 500 + seed).unwrap();
        let (res, _) = solve(&game, &cfg).unwrap();
        all_converged &= res.status == Status::Converged;
        let (v_star, _) = value_iteration(&game, 1e-12).unwrap();
        worst_v = worst_v.max(res.value.max_abs_diff(&v_star));
        let stage = stage_utility(&game, &res.value).unwrap();
        let dev = deviation_utility(&game, &res.policy, &stage).unwrap();
        for s in 0..5 {
            let probs = res.policy.probs().slice(ndarray::s![s, 0, ..]).to_owned();
            let chosen = (0..3).fold(0, |b, a| if probs[a] > probs[b] { a } else { b });
            let best = (0..3).map(|a| dev[[s, 0, a]]).fold(f64::NEG_INFINITY, f64::max);
            greedy_ok &= dev[[s, 0, chosen]] >= best - 1e-7;
        }
        if res.status == Status::Converged {
            ledger.converged.push((game, res, eps));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        all_converged && worst_v < 1e-5 && greedy_ok && secs < 60.0,
        format!("max |V − V_vi| {worst_v:.2e}, greedy-consistent {greedy_ok}, eps {eps:e}, {secs:.2}s"),
    )
}

fn static_degeneration(ledger: &mut Ledger) -> Outcome {
    let start = Instant::now();
    let cfg = SolveConfig::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, game, target) in [("pennies", pennies(), 0.5), ("rps", rock_paper_scissors(), 1.0 / 3.0)] {
        let (res, _) = solve(&game, &cfg).unwrap();
        let off = res.policy.probs().iter().fold(0.0_f64, |m, p| m.max((p - target).abs()));
        ok &= res.status == Status::Converged && off <= 1e-3 && res.eps_achieved < 1e-6;
        notes.push(format!("{name} off {off:.1e} canosec {:.1e}", res.eps_achieved));
        ledger.converged.push((game, res, cfg.outer_tol_eps));
    }
    // the same games from a lopsided start
    let tight = SolveConfig { outer_tol_eps: 1e-7, ..Default::default() };
    for (name, game, target) in [("pennies", pennies(), 0.5), ("rps", rock_paper_scissors(), 1.0 / 3.0)] {
        let a = game.n_actions();
        let skew = Array3::from_shape_fn((1, 2, a), |(_, i, b)| if b == i { 0.8 } else { 0.2 / (a - 1) as f64 });
        let start_policy = Policy::from_probs(skew).unwrap();
        let (res, _) = bundle_solve::solve_from(&game, &tight, &start_policy).unwrap();
        let off = res.policy.probs().iter().fold(0.0_f64, |m, p| m.max((p - target).abs()));
        ok &= res.status == Status::Converged && off <= 1e-3 && res.eps_achieved < 1e-6;
        notes.push(format!("{name} from skewed start off {off:.1e} canosec {:.1e}", res.eps_achieved));
        ledger.converged.push((game, res, tight.outer_tol_eps));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(ok && secs < 10.0, format!("{}; {secs:.2}s", notes.join(", ")))
}

fn random_game_suite(ledger: &mut Ledger) -> Outcome {
    let start = Instant::now();
    let cfg = SolveConfig { outer_tol_eps: 1e-3, ..Default::default() };
    let (mut converged, mut slowest) = (0, 0.0_f64);
    for seed in 0..100 {
        let game = generate_random_game(3, 3, 3, 0.5, seed).unwrap();
        let t = Instant::now();
        let (res, _) = solve(&game, &cfg).unwrap();
        slowest = slowest.max(t.elapsed().as_secs_f64());
        if res.status == Status::Converged {
            converged += 1;
            ledger.converged.push((game, res, cfg.outer_tol_eps));
        }
    }
    outcome(
        converged == 100 && slowest < 60.0,
        format!("{converged}/100 converged at eps 1e-3, slowest {slowest:.2}s, total {:.1}s", start.elapsed().as_secs_f64()),
    )
}

fn dp_linear_rate() -> Outcome {
    let mut rng = rng(5);
    let mut worst = 0.0_f64;
    let mut limit_err = 0.0_f64;
    for (k, gamma) in [0.5, 0.7, 0.9, 0.95].into_iter().enumerate() {
        for rep in 0..3u64 {
            let game = generate_random_game(2, 4, 3, gamma, 40 + 10 * k as u64 + rep).unwrap();
            let policy = random_policy(&mut rng, (4, 2, 3));
            let m = vec![rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)];
            let mut v = random_values(&mut rng, 4, 2);
            let residual = |v: &ValueFunction| v.max_abs_diff(&dp_step(&game, &policy, v, &m).unwrap());
            for _ in 0..20 {
                v = dp_step(&game, &policy, &v, &m).unwrap();
            }
            for _ in 0..10 {
                let before = residual(&v);
                v = dp_step(&game, &policy, &v, &m).unwrap();
                worst = worst.max((residual(&v) / before - gamma).abs());
            }
            for _ in 0..2000 {
                v = dp_step(&game, &policy, &v, &m).unwrap();
            }
            let shift: Vec<f64> = m.iter().map(|x| gamma * x / (1.0 - gamma)).collect();
            limit_err = limit_err.max(v.max_abs_diff(&policy_value(&game, &policy).unwrap().shifted(&shift)));
        }
    }
    outcome(
        worst <= 0.02 && limit_err < 1e-8,
        format!("max |ratio − γ| {worst:.2e} over γ ∈ {{0.5,0.7,0.9,0.95}}, limit error {limit_err:.1e}"),
    )
}

fn gradient_check() -> Outcome {
    let mut rng = rng(6);
    let h = 1e-5;
    let mut worst = 0.0_f64;
    for k in 0..50u64 {
        let (n, s, a) = (1 + (k % 3) as usize, 1 + (k % 2) as usize, 2 + ((k / 3) % 2) as usize);
        let game = generate_random_game(n, s, a, 0.5, 900 + k).unwrap();
        let stage = stage_utility(&game, &random_values(&mut rng, s, n)).unwrap();
        let policy = random_policy(&mut rng, (s, n, a));
        let mu = random_mu(&mut rng, (s, n, a), -1.0, 0.5);
        let dq = dual_quantities(&game, &policy, &mu, &stage).unwrap();
        let pairs = deviation_utility_pairs(&game, &policy, &stage).unwrap();
        let pg = projected_gradient(&policy, &dq, &pairs);
        let direction = Array3::from_shape_fn((s, n, a), |_| rng.random_range(-1.0..1.0));
        let analytic: f64 = (&pg * &direction).sum();
        let f = frozen_objective(&game, &stage, &mu, &dq.pi_hat, &dq.r_hat);
        let fd = finite_difference_directional(f, policy.logits().unwrap(), &direction, h).unwrap();
        worst = worst.max((fd - analytic).abs() / analytic.abs().max(1e-300));
    }
    outcome(worst < 1e-4, format!("max relative error {worst:.2e} at 50 points, h = {h:e}"))
}

fn brouwer_normalization() -> Outcome {
    let mut rng = rng(7);
    let mut worst = 0.0_f64;
    for k in 0..200u64 {
        let (n, s, a) = (1 + (k % 3) as usize, 1 + (k % 2) as usize, 1 + (k % 4) as usize);
        let game = generate_random_game(n, s, a, 0.3, 2000 + k).unwrap();
        let policy = random_policy(&mut rng, (s, n, a));
        let mu = random_mu(&mut rng, (s, n, a), -6.0, 6.0);
        let stage = stage_utility(&game, &random_values(&mut rng, s, n)).unwrap();
        let dq = dual_quantities(&game, &policy, &mu, &stage).unwrap();
        for row in dq.pi_hat.lanes(Axis(2)) {
            worst = worst.max((row.sum() - 1.0).abs());
        }
    }
    outcome(worst <= 1e-10, format!("max |Σπ̂ − 1| {worst:.2e} at 200 pairs, μ ∈ [1e-6, 1e6]"))
}

fn canonical_identities() -> Outcome {
    let mut rng = rng(8);
    let (mut sum_err, mut shift_err, mut kkt_err) = (0.0_f64, 0.0_f64, 0.0_f64);
    for k in 0..60u64 {
        let (n, s, a) = (1 + (k % 3) as usize, 1 + (k % 3) as usize, 2 + (k % 2) as usize);
        let game = generate_random_game(n, s, a, 0.7, 3000 + k).unwrap();
        let policy = random_policy(&mut rng, (s, n, a));
        let v = policy_value(&game, &policy).unwrap();
        let mu_bar = canonical_section(&game, &policy, &v).unwrap();
        let gap = &apply_dhat(&game, &policy, &v).unwrap().values - &apply_d(&game, &policy, &v).unwrap().values;
        sum_err = sum_err.max(max_abs_diff3(&mu_bar.mu.sum_axis(Axis(2)).insert_axis(Axis(2)), &gap.insert_axis(Axis(2))));

        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let moved = canonical_section(&game, &policy, &v.shifted(&c)).unwrap();
        shift_err = shift_err.max(max_abs_diff3(&moved.mu, &mu_bar.mu));

        let lift = ndarray::Array2::from_shape_fn((s, n), |_| rng.random_range(0.01..5.0));
        let fiber = Array3::from_shape_fn((s, n, a), |(st, i, b)| {
            lift[[st, i]] * policy.probs()[[st, i, b]] + mu_bar.mu[[st, i, b]]
        });
        let mu = BarrierParameter { mu: fiber };
        let stage = stage_utility(&game, &v).unwrap();
        let dq = dual_quantities(&game, &policy, &mu, &stage).unwrap();
        let complementarity = max_abs_diff3(&(&dq.r * policy.probs()), &mu.mu);
        kkt_err = kkt_err.max(max_abs_diff3(&dq.pi_hat, policy.probs())).max(complementarity);
    }
    outcome(
        sum_err <= 1e-10 && shift_err <= 1e-12 && kkt_err <= 1e-9,
        format!("(a) {sum_err:.1e} (b) {shift_err:.1e} (c) {kkt_err:.1e} at 60 points"),
    )
}

fn differential_richardson() -> Outcome {
    let mut rng = rng(9);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut points = 0;
    let mut k = 0u64;
    while points < 20 && k < 200 {
        k += 1;
        let (n, a) = (2 + (k % 2) as usize, 2 + ((k / 2) % 2) as usize);
        let game = generate_random_game(n, 1, a, 0.0, 4000 + k).unwrap();
        let policy = random_policy(&mut rng, (1, n, a));
        let mu_bar = canonical_section(&game, &policy, &ValueFunction::zeros(1, n)).unwrap();
        let lift: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let mu = BarrierParameter {
            mu: Array3::from_shape_fn((1, n, a), |(_, i, b)| lift[i] * policy.probs()[[0, i, b]] + mu_bar.mu[[0, i, b]]),
        };
        let dev = deviation_utility(&game, &policy, game.utility()).unwrap();
        let dq = dual_quantities_from_deviation(&policy, &mu, &dev).unwrap();
        let pairs = deviation_utility_pairs(&game, &policy, game.utility()).unwrap();
        let diff = bundle_differential(&policy, &dq, &pairs, 1e-10);
        if diff.is_singular() {
            continue;
        }
        let delta = Array3::from_shape_fn((1, n, a), |_| rng.random_range(-1.0..1.0));
        let error = |h: f64| -> f64 {
            let moved = BarrierParameter { mu: &mu.mu * &delta.mapv(|d| 1.0 + h * d) };
            let p = bundle_point(&game, &policy, &moved);
            let actual = p.probs().mapv(f64::ln) - policy.probs().mapv(f64::ln);
            let predicted = diff.predict(&(&delta * h)).unwrap();
            max_abs_diff3(&actual, &predicted)
        };
        let ratio = error(1e-2) / error(5e-3);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        points += 1;
    }
    outcome(
        points == 20 && lo >= 3.5 && hi <= 4.5,
        format!("{points} points, error ratios in [{lo:.3}, {hi:.3}] for h = 1e-2 → 5e-3"),
    )
}

fn oddness() -> Outcome {
    let mut counts = Vec::new();
    let mut ok = true;
    for k in 0..20u64 {
        let game = generate_random_game(2, 1, 2, 0.0, 5000 + k).unwrap();
        let scan = grid_nash_scan(&game, 200, 1e-6).unwrap();
        match scan.count() {
            Some(c) => {
                ok &= c % 2 == 1;
                counts.push(c.to_string());
            }
            None => counts.push("flagged".into()),
        }
    }
    outcome(ok, format!("equilibrium counts [{}]", counts.join(" ")))
}

fn soundness_and_determinism(ledger: &Ledger) -> Outcome {
    let mut unsound = 0;
    for (game, res, eps) in &ledger.converged {
        if !verify_epsilon_equilibrium(game, &res.policy, *eps).unwrap().0 {
            unsound += 1;
        }
    }
    let mut identical = true;
    for seed in 0..8 {
        let game = generate_random_game(3, 3, 3, 0.5, seed).unwrap();
        let cfg = SolveConfig { outer_tol_eps: 1e-3, seed, ..Default::default() };
        identical &= solve(&game, &cfg).unwrap() == solve(&game, &cfg).unwrap();
    }
    let batch = |jobs: usize| {
        let args = BatchArgs {
            count: 6,
            shape: ShapeArgs { players: 2, states: 2, actions: 2, gamma: 0.5, seed: 17 },
            config: ConfigArgs { eps: Some(1e-3), ..ConfigArgs::default() },
            jobs,
            output: None,
        };
        run_batch(&args).unwrap()
    };
    let (one, four) = (batch(1), batch(4));
    let same_batch = one.games.iter().zip(&four.games).all(|(x, y)| {
        (x.seed, x.status, x.outer_steps, x.inner_steps, x.eps_achieved) == (y.seed, y.status, y.outer_steps, y.inner_steps, y.eps_achieved)
    });
    outcome(
        unsound == 0 && identical && same_batch,
        format!(
            "{} converged results verified ({unsound} unsound); repeat solves identical {identical}; batch jobs 1 vs 4 identical {same_batch}",
            ledger.converged.len()
        ),
    )
}

fn complexity_trend() -> String {
    let cfg = SolveConfig { outer_tol_eps: 1e-3, ..Default::default() };
    let medians: Vec<f64> = [(2, 2, 2), (3, 3, 3), (4, 3, 3)]
        .into_iter()
        .map(|(n, s, a)| {
            let mut times: Vec<f64> = (0..9)
                .map(|seed| {
                    let game = generate_random_game(n, s, a, 0.5, 7000 + seed).unwrap();
                    let t = Instant::now();
                    solve(&game, &cfg).unwrap();
                    t.elapsed().as_secs_f64()
                })
                .collect();
            times.sort_by(f64::total_cmp);
            times[times.len() / 2]
        })
        .collect();
    format!(
        "median seconds (2,2,2) {:.3}, (3,3,3) {:.3}, (4,3,3) {:.3}; ratios {:.1}x, {:.1}x",
        medians[0],
        medians[1],
        medians[2],
        medians[1] / medians[0],
        medians[2] / medians[1]
    )
}

fn main() {
    let mut ledger = Ledger::default();
    let criteria: Vec<(&str, Box<dyn FnMut(&mut Ledger) -> Outcome>)> = vec![
        ("1 contraction oracle equivalence", Box::new(|_| contraction_oracle())),
        ("2 MDP degeneration", Box::new(mdp_degeneration)),
        ("3 static degeneration", Box::new(static_degeneration)),
        ("4 random dynamic games N=S=A=3", Box::new(random_game_suite)),
        ("5 DP linear rate", Box::new(|_| dp_linear_rate())),
        ("6 gradient check", Box::new(|_| gradient_check())),
        ("7 Brouwer normalization", Box::new(|_| brouwer_normalization())),
        ("8 canonical-section identities", Box::new(|_| canonical_identities())),
        ("9 differential consistency", Box::new(|_| differential_richardson())),
        ("10 oddness desk check", Box::new(|_| oddness())),
    ];
    let mut failed = 0;
    for (name, mut check) in criteria {
        let result = check(&mut ledger);
        failed += usize::from(!result.pass);
        println!("{} criterion {name}: {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
    }
    let last = soundness_and_determinism(&ledger);
    failed += usize::from(!last.pass);
    println!("{} criterion 11 soundness and determinism: {}", if last.pass { "PASS" } else { "FAIL" }, last.detail);
    println!("INFO complexity trend (not gating): {}", complexity_trend());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 11 criteria passed");
}
