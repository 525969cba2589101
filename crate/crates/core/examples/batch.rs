//! Solves a batch of random games on several threads.

use bundle_solve::cli::{run_batch, BatchArgs, ConfigArgs, ShapeArgs};

fn main() -> bundle_solve::Result<()> {
    let args = BatchArgs {
        count: 20,
        shape: ShapeArgs { players: 3, states: 3, actions: 3, gamma: 0.5, seed: 0 },
        config: ConfigArgs { eps: Some(1e-3), ..Default::default() },
        jobs: 4,
        output: None,
    };
    let summary = run_batch(&args)?;
    for g in &summary.games {
        println!(
            "seed {:>12}  {:<15} outer {:>4}  inner {:>5}  eps {:.2e}  {:.3}s",
            g.seed,
            g.status.as_str(),
            g.outer_steps,
            g.inner_steps,
            g.eps_achieved,
            g.wall_seconds
        );
    }
    println!("{}/{} converged", summary.n_converged, summary.n_games);
    Ok(())
}
