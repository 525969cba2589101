//! Solves a random stochastic game and prints the outer-loop progress.

use bundle_solve::{generate_random_game, solve, SolveConfig};

fn main() -> bundle_solve::Result<()> {
    let game = generate_random_game(3, 3, 3, 0.5, 7)?;
    let cfg = SolveConfig { outer_tol_eps: 1e-4, ..Default::default() };
    let (result, trace) = solve(&game, &cfg)?;
    for rec in trace.iter().filter(|r| r.inner_index == 0).step_by(20) {
        println!(
            "outer {:>4}  canonical section {:.3e}  max mu {:.3e}",
            rec.outer_index, rec.canosec_norm, rec.mu_norm
        );
    }
    println!(
        "{}: eps {:.2e}, {} outer and {} inner steps",
        result.status.as_str(),
        result.eps_achieved,
        result.outer_steps_total,
        result.inner_steps_total
    );
    println!("values per state and player:\n{:.4}", result.value.values);
    Ok(())
}
