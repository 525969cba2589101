//! Checks candidate policies for the epsilon-equilibrium condition.

use bundle_solve::solver::worst_violation;
use bundle_solve::{generate_random_game, solve, verify_epsilon_equilibrium, Policy, SolveConfig};

fn main() -> bundle_solve::Result<()> {
    let game = generate_random_game(2, 3, 2, 0.8, 5)?;
    let eps = 1e-4;
    let (result, _) = solve(&game, &SolveConfig { outer_tol_eps: eps, ..Default::default() })?;
    for (name, policy) in [("uniform", Policy::uniform_for(&game)), ("solver output", result.policy)] {
        let (ok, mu) = verify_epsilon_equilibrium(&game, &policy, eps)?;
        let ((s, i, a), worst) = worst_violation(&mu);
        println!("{name}: equilibrium at {eps:e}: {ok}; largest entry {worst:.3e} at state {s}, player {i}, action {a}");
    }
    Ok(())
}
