//! Solves two static games and compares the result with a grid scan.

use bundle_solve::oracles::grid_nash_scan;
use bundle_solve::{solve, DynamicGame, SolveConfig};
use ndarray::array;

fn main() -> bundle_solve::Result<()> {
    // battle of the sexes: two pure equilibria and one mixed
    let game = DynamicGame::static_game(2, 2, array![[2.0, 1.0], [0.0, 0.0], [0.0, 0.0], [1.0, 2.0]])?;
    let (result, trace) = solve(&game, &SolveConfig::default())?;
    println!("status {} after {} trace records", result.status.as_str(), trace.len());
    for i in 0..2 {
        println!("player {i}: {:?}", result.policy.probs().slice(ndarray::s![0, i, ..]).to_vec());
    }
    println!("canonical section norm {:.2e}", result.eps_achieved);

    let scan = grid_nash_scan(&game, 200, 1e-6)?;
    println!("grid scan finds {} equilibria:", scan.equilibria.len());
    for eq in &scan.equilibria {
        println!("  {:?}", eq.probs().iter().map(|p| (p * 1e4).round() / 1e4).collect::<Vec<_>>());
    }
    Ok(())
}
