//! Perfect equilibria of finite dynamic games.
//!
//! A game has `N` players, `S` states and `A` actions per player. The solver
//! follows a path of interior points on the equilibrium bundle, the set of
//! (policy, barrier) pairs where each policy is its own dual, while shrinking
//! the barrier toward zero. The limit points are equilibria.
//!
//! ```
//! use bundle_solve::{solve, DynamicGame, SolveConfig, Status};
//! use ndarray::array;
//!
//! let pennies = DynamicGame::static_game(
//!     2,
//!     2,
//!     array![[1.0, -1.0], [-1.0, 1.0], [-1.0, 1.0], [1.0, -1.0]],
//! )
//! .unwrap();
//! let (result, _trace) = solve(&pennies, &SolveConfig::default()).unwrap();
//! assert_eq!(result.status, Status::Converged);
//! assert!((result.policy.probs()[[0, 0, 0]] - 0.5).abs() < 1e-3);
//! ```

pub mod bundle;
pub mod cli;
pub mod contract;
pub mod dp;
pub mod error;
pub mod game;
pub mod io;
pub mod linalg;
pub mod oracles;
pub mod solver;

pub use bundle::{
    bundle_differential, canonical_descent_step, canonical_section, coefficient_matrix, dual_quantities,
    initial_barrier, projected_gradient, solve_dual_value, unbiased_objective, BundleDifferential, DualQuantities,
};
pub use contract::{deviation_utility, deviation_utility_pairs, joint_policy_prob, stage_utility};
pub use dp::{
    apply_d, apply_dhat, cone_distances, dp_step, in_best_response_cone, in_policy_cone,
    min_shift_to_best_response_cone, policy_value, ConeDistances,
};
pub use error::{Error, Result};
pub use game::{generate_random_game, BarrierParameter, DynamicGame, Policy, ValueFunction};
pub use solver::{
    scan_policy_space, solve, solve_from, verify_epsilon_equilibrium, InnerStep, SolveConfig, SolveResult,
    Status, TraceRecord,
};
