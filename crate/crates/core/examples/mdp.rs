//! With one player the solver reduces to an MDP solver; compare with value iteration.

use bundle_solve::oracles::value_iteration;
use bundle_solve::{generate_random_game, solve, SolveConfig};

fn main() -> bundle_solve::Result<()> {
    let game = generate_random_game(1, 5, 3, 0.9, 3)?;
    let (result, _) = solve(&game, &SolveConfig { outer_tol_eps: 1e-8, ..Default::default() })?;
    let (v_star, greedy) = value_iteration(&game, 1e-12)?;
    println!("status {}", result.status.as_str());
    for s in 0..game.n_states() {
        let probs = result.policy.probs().slice(ndarray::s![s, 0, ..]).to_vec();
        let vi_action = greedy.probs().slice(ndarray::s![s, 0, ..]).iter().position(|&p| p == 1.0).unwrap();
        println!(
            "state {s}: V {:.6} (value iteration {:.6}), policy {:.4?}, greedy action {vi_action}",
            result.value.values[[s, 0]],
            v_star.values[[s, 0]],
            probs
        );
    }
    println!("max |V − V*| = {:.2e}", result.value.max_abs_diff(&v_star));
    Ok(())
}
