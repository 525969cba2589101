//! First-order motion of an equilibrium-bundle point when the barrier shrinks,
//! compared with the point the inner loop actually reaches.

use bundle_solve::bundle::{bundle_differential, dual_quantities, stage_contractions};
use bundle_solve::solver::{inner_converge, Phase, SolverState};
use bundle_solve::{generate_random_game, BarrierParameter, SolveConfig};
use ndarray::Array3;

fn main() -> bundle_solve::Result<()> {
    let game = generate_random_game(2, 1, 3, 0.0, 4)?;
    let cfg = SolveConfig { inner_tol_bias: 1e-13, ..Default::default() };
    let mut state = SolverState::new(&game, &cfg, None)?;
    assert_eq!(inner_converge(&game, &mut state, &cfg)?, Phase::Done);
    let base = state.policy.clone();
    let mu = state.mu.clone();

    let (_, pairs) = stage_contractions(&game, &base, game.utility())?;
    let dq = dual_quantities(&game, &base, &mu, game.utility())?;
    let diff = bundle_differential(&base, &dq, &pairs, cfg.singular_rcond);
    println!("smallest reciprocal condition number {:.3e}", diff.min_condition());

    for eta in [0.2, 0.1, 0.05, 0.025] {
        let dlogmu = Array3::from_elem(mu.mu.dim(), (1.0f64 - eta).ln());
        let predicted = diff.predict(&dlogmu).expect("nonsingular");
        state.policy = base.clone();
        state.mu = BarrierParameter { mu: &mu.mu * (1.0 - eta) };
        assert_eq!(inner_converge(&game, &mut state, &cfg)?, Phase::Done);
        let actual = state.policy.probs().mapv(f64::ln) - base.probs().mapv(f64::ln);
        let err = (&actual - &predicted).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        println!("eta {eta:<6} |dlog pi| {:.3e}  prediction error {err:.3e}", actual.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
    }
    Ok(())
}
