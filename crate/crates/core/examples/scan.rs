//! Ranks random policies by their canonical-section norm.

use bundle_solve::{generate_random_game, scan_policy_space};

fn main() -> bundle_solve::Result<()> {
    let game = generate_random_game(2, 2, 2, 0.6, 11)?;
    let ranked = scan_policy_space(&game, 2000, 1)?;
    println!("best of {}:", ranked.len());
    for (policy, norm) in ranked.iter().take(5) {
        println!("  {norm:.4e}  {:.3?}", policy.probs().iter().collect::<Vec<_>>());
    }
    println!("worst: {:.4e}", ranked.last().unwrap().1);
    Ok(())
}
