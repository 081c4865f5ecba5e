use super::freeze::freeze_players_stochastic;
use super::solver::{default_eval_tol, MarkovSolver};
use super::values::stationary_satisfied_players;
use super::{StationaryPolicyProfile, StochasticGame};
use crate::dynamics::{
    construct_with, validate_path_with, FreezeSolve, PathOptions, PathRecord, SatisficingGame, SolveFailure,
};
use crate::error::{Error, Result};
use crate::partition::SatisficingConfig;
use crate::Scalar;

/// A stochastic game seen through stationary policies, with every player one
/// group across all of its states. Values are computed to `eval_tol`.
#[derive(Clone, Copy, Debug)]
pub struct MarkovDynamics<'a, T> {
    pub game: &'a StochasticGame<T>,
    pub eval_tol: T,
}

impl<'a, T: Scalar> MarkovDynamics<'a, T> {
    pub fn new(game: &'a StochasticGame<T>) -> Self {
        Self {
            game,
            eval_tol: default_eval_tol(),
        }
    }
}

impl<T: Scalar> SatisficingGame<T> for MarkovDynamics<'_, T> {
    type Profile = StationaryPolicyProfile<T>;

    fn num_players(&self) -> usize {
        self.game.num_players()
    }

    fn satisfied_groups(&self, pi: &StationaryPolicyProfile<T>, config: &SatisficingConfig<T>) -> Result<Vec<usize>> {
        let players = stationary_satisfied_players(self.game, pi, config.epsilon, self.eval_tol)?;
        Ok(config
            .partition
            .groups()
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().all(|i| players.binary_search(i).is_ok()))
            .map(|(k, _)| k)
            .collect())
    }

    fn same_strategy(&self, a: &StationaryPolicyProfile<T>, b: &StationaryPolicyProfile<T>, player: usize) -> bool {
        a.same_policy(b, player, T::simplex_tol())
    }

    fn strategy_blocks(&self, player: usize) -> Vec<usize> {
        vec![self.game.action_counts()[player]; self.game.num_states()]
    }

    fn with_strategy(
        &self,
        pi: &StationaryPolicyProfile<T>,
        player: usize,
        blocks: Vec<Vec<T>>,
    ) -> StationaryPolicyProfile<T> {
        pi.replace_player(player, blocks)
    }

    fn flatten(&self, pi: &StationaryPolicyProfile<T>) -> Vec<T> {
        pi.flat()
    }
}

/// Freeze-and-solve for stationary policies.
pub struct MarkovFreezeAndSolve<'a, T, S> {
    pub game: &'a StochasticGame<T>,
    pub solver: &'a S,
}

impl<T: Scalar, S: MarkovSolver<T>> FreezeSolve<T, StationaryPolicyProfile<T>> for MarkovFreezeAndSolve<'_, T, S> {
    fn freeze_and_solve(
        &self,
        pi: &StationaryPolicyProfile<T>,
        free: &[usize],
        tol: T,
    ) -> std::result::Result<StationaryPolicyProfile<T>, SolveFailure> {
        let frozen: Vec<usize> = (0..self.game.num_players()).filter(|i| !free.contains(i)).collect();
        let sub = freeze_players_stochastic(self.game, pi, &frozen).map_err(|e| SolveFailure {
            reason: e.to_string(),
            subgame: serde_json::Value::Null,
        })?;
        let failure = |e: Error| SolveFailure {
            reason: e.to_string(),
            subgame: serde_json::to_value(&sub.game).unwrap_or(serde_json::Value::Null),
        };
        let o = self.solver.solve(&sub.game, tol).map_err(failure)?;
        sub.embed(&o.policy).map_err(failure)
    }
}

/// Freeze-and-solve path over stationary policies with one group per
/// player.
pub fn construct_path_stochastic<T: Scalar, S: MarkovSolver<T>>(
    game: &StochasticGame<T>,
    pi0: &StationaryPolicyProfile<T>,
    epsilon: T,
    solver: &S,
    options: &PathOptions,
) -> Result<PathRecord<StationaryPolicyProfile<T>, T>> {
    pi0.check(game)?;
    let config = SatisficingConfig::singletons(epsilon, game.num_players())?;
    construct_with(
        &MarkovDynamics::new(game),
        &MarkovFreezeAndSolve { game, solver },
        pi0.clone(),
        &config,
        options,
    )
}

pub fn validate_stochastic_path<T: Scalar>(
    game: &StochasticGame<T>,
    path: &PathRecord<StationaryPolicyProfile<T>, T>,
) -> Result<bool> {
    for p in &path.profiles {
        p.check(game)?;
    }
    validate_path_with(&MarkovDynamics::new(game), path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{construct_path, Termination};
    use crate::markov::tests::seeded_game;
    use crate::markov::MarkovDeskSolver;
    use crate::solvers::DeskSolver;
    use crate::{MixedProfile, NormalFormGame};

    #[test]
    fn equilibrium_start() {
        let g = StochasticGame::new(vec![2, 2], 1, vec![1.0; 4], vec![0.0; 8], vec![0.5, 0.5]).unwrap();
        let pi = StationaryPolicyProfile::uniform(&[2, 2], 1);
        let p = construct_path_stochastic(&g, &pi, 0.0, &MarkovDeskSolver::default(), &PathOptions::default()).unwrap();
        assert_eq!(p.profiles.len(), 1);
        assert_eq!(p.termination, Termination::Equilibrium);
    }

    #[test]
    fn single_state_matches_normal_form() {
        let nf = NormalFormGame::bimatrix(
            &[vec![0.3, -0.8, 0.1], vec![-0.2, 0.5, 0.9]],
            &[vec![-0.4, 0.6, 0.2], vec![0.7, -0.1, -0.9]],
        )
        .unwrap();
        let g = StochasticGame::from_normal_form(&nf, vec![0.0, 0.0]).unwrap();
        let s0 = MixedProfile::pure(&[2, 3], &[0, 0]).unwrap();
        let opts = PathOptions {
            seed: 9,
            ..PathOptions::default()
        };
        let cfg = SatisficingConfig::singletons(1e-6, 2).unwrap();
        let a = construct_path(&nf, &s0, &cfg, &DeskSolver::default(), &opts).unwrap();
        let pi0 = StationaryPolicyProfile::from_mixed(&s0, 1);
        let b = construct_path_stochastic(&g, &pi0, 1e-6, &MarkovDeskSolver::default(), &opts).unwrap();
        assert_eq!(a.profiles.len(), b.profiles.len());
        assert_eq!(a.per_step_satisfied, b.per_step_satisfied);
        for (p, q) in a.profiles.iter().zip(&b.profiles) {
            assert!(p.approx_eq(&q.state_profile(0), 1e-9));
        }
    }

    #[test]
    fn random_paths_are_valid() {
        for seed in 0..5 {
            let g = seeded_game(&[2, 2], 2, 0.8, 40 + seed);
            let pi0 = StationaryPolicyProfile::uniform(&[2, 2], 2);
            let opts = PathOptions {
                seed,
                ..PathOptions::default()
            };
            let p = construct_path_stochastic(&g, &pi0, 1e-4, &MarkovDeskSolver::default(), &opts).unwrap();
            assert!(validate_stochastic_path(&g, &p).unwrap());
        }
    }
}
