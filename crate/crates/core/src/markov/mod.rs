//! Finite-state discounted stochastic games under stationary policies.

mod freeze;
mod game;
mod kstep;
mod path;
mod policy;
pub mod simulate;
mod solver;
mod values;

pub use freeze::{freeze_players_stochastic, FrozenSubgame};
pub use game::{StochasticGame, StochasticGameSpec};
pub use kstep::{compile_k_step, CompiledKStep, KStepGame, KStepState, MAX_KSTEP_STATES};
pub use path::{construct_path_stochastic, validate_stochastic_path, MarkovDynamics, MarkovFreezeAndSolve};
pub use policy::StationaryPolicyProfile;
pub use solver::{default_eval_tol, MarkovDeskSolver, MarkovMethod, MarkovOutcome, MarkovSettings, MarkovSolver};
pub use values::{
    apply_value_operator, continuity_constant, evaluate_all, evaluate_policy, induced_mdp_best_response,
    induced_mdp_best_value, is_markov_equilibrium, stationary_regrets, stationary_residual,
    stationary_satisfied_players, value_lipschitz_bound, ValueTable,
};

#[cfg(test)]
pub(crate) mod tests {
    use rand::Rng as _;

    use super::StochasticGame;
    use crate::rng::substream;

    /// Random game with payoffs uniform on [-1, 1] and Dirichlet transition
    /// rows.
    pub(crate) fn seeded_game(counts: &[usize], states: usize, gamma: f64, seed: u64) -> StochasticGame<f64> {
        let mut rng = substream(seed, &[0xFEED]);
        let joint: usize = counts.iter().product();
        let mut transition = Vec::new();
        for _ in 0..states * joint {
            transition.extend(crate::simplex::random_point::<f64, _>(states, &mut rng));
        }
        let payoffs = (0..states * joint * counts.len())
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        StochasticGame::new(counts.to_vec(), states, transition, payoffs, vec![gamma; counts.len()]).unwrap()
    }
}
