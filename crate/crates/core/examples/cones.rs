//! Policy cone and best-response cone: distances, the shifted DP iteration
//! and its limit.

use bundle_solve::dp::{cone_distances, dp_step, in_best_response_cone, in_policy_cone, min_shift_to_best_response_cone};
use bundle_solve::{generate_random_game, policy_value, Policy, ValueFunction};

fn main() -> bundle_solve::Result<()> {
    let gamma = 0.8;
    let game = generate_random_game(2, 3, 2, gamma, 2)?;
    let policy = Policy::uniform_for(&game);
    let apex = policy_value(&game, &policy)?;
    println!("policy value (cone apex):\n{:.4}", apex.values);

    let v = ValueFunction::zeros(3, 2);
    let dist = cone_distances(&game, &policy, &v)?;
    println!("from V = 0: d =\n{:.4}\nd_hat =\n{:.4}", dist.d, dist.d_hat);
    let shift = min_shift_to_best_response_cone(&game, &policy, &v)?;
    let lifted = v.shifted(&shift);
    println!(
        "shift {:.4?}: in policy cone {}, in best-response cone {}",
        shift,
        in_policy_cone(&game, &policy, &lifted)?,
        in_best_response_cone(&game, &policy, &lifted)?
    );

    let m = [1.0, 1.0];
    let mut iterate = v;
    for k in 1..=60 {
        let next = dp_step(&game, &policy, &iterate, &m)?;
        if k % 15 == 0 {
            println!("step {k}: change {:.3e}", next.max_abs_diff(&iterate));
        }
        iterate = next;
    }
    let limit = apex.shifted(&[gamma / (1.0 - gamma); 2]);
    println!("distance to V_pi + gamma m / (1 - gamma): {:.3e}", iterate.max_abs_diff(&limit));
    Ok(())
}
