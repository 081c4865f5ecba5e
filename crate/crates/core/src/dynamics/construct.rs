use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::legality::spec_from_satisfied;
use super::successors::successors_given;
use super::{PathRecord, SatisficingGame, Termination, DEFAULT_BUDGET, DEFAULT_GRID_STEP, DEFAULT_MAX_STEPS};
use crate::error::{Error, Result};
use crate::game::NormalFormGame;
use crate::partition::SatisficingConfig;
use crate::profile::MixedProfile;
use crate::rng::substream;
use crate::solvers::EquilibriumSolver;
use crate::subgame::restrict_subgame;
use crate::Scalar;

/// Revisits of one cycle signature tolerated before probing widens.
const MAX_REVISITS: usize = 2;
const MAX_ESCALATION: usize = 64;
const SIGNATURE_SCALE: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathOptions {
    pub max_steps: usize,
    /// Lattice step for the group-count descent probe.
    pub grid_step: f64,
    /// Successors sampled per descent probe.
    pub budget: usize,
    pub seed: u64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            max_steps: DEFAULT_MAX_STEPS,
            grid_step: DEFAULT_GRID_STEP,
            budget: DEFAULT_BUDGET,
            seed: 0,
        }
    }
}

/// A failed sub-game solve, with the sub-game instance for reproduction.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveFailure {
    pub reason: String,
    pub subgame: serde_json::Value,
}

/// Freezes every player outside `free` at its strategy in `s` and returns
/// `s` with the free players replaced by an approximate equilibrium of the
/// resulting sub-game.
pub trait FreezeSolve<T: Scalar, P> {
    fn freeze_and_solve(&self, s: &P, free: &[usize], tol: T) -> std::result::Result<P, SolveFailure>;
}

/// [`FreezeSolve`] for normal-form games backed by any equilibrium solver.
pub struct FreezeAndSolve<'a, T, S> {
    pub game: &'a NormalFormGame<T>,
    pub solver: &'a S,
}

impl<T: Scalar, S: EquilibriumSolver<T>> FreezeSolve<T, MixedProfile<T>> for FreezeAndSolve<'_, T, S> {
    fn freeze_and_solve(
        &self,
        s: &MixedProfile<T>,
        free: &[usize],
        tol: T,
    ) -> std::result::Result<MixedProfile<T>, SolveFailure> {
        let sub = restrict_subgame(self.game, s, free).map_err(|e| SolveFailure {
            reason: e.to_string(),
            subgame: serde_json::Value::Null,
        })?;
        let failure = |e: Error| SolveFailure {
            reason: e.to_string(),
            subgame: serde_json::to_value(&sub.game).unwrap_or(serde_json::Value::Null),
        };
        let outcome = self.solver.solve(&sub.game, tol).map_err(failure)?;
        sub.embed(&outcome.profile).map_err(failure)
    }
}

fn signature<T: Scalar>(satisfied: &[usize], flat: &[T]) -> (Vec<usize>, Vec<i64>) {
    let rounded = flat
        .iter()
        .map(|x| (x.as_f64() * SIGNATURE_SCALE).round() as i64)
        .collect();
    (satisfied.to_vec(), rounded)
}

/// The freeze-and-solve path constructor, generic over the game class.
///
/// Each step freezes the satisfied groups and solves the sub-game of the
/// rest to `ε/2`. If that jump does not land on an ε-equilibrium, sampled
/// successors are probed and the first one with the smallest group count
/// below the current one is taken instead; otherwise the jump is taken.
/// Repeating a (satisfied set, rounded profile) signature more than twice
/// multiplies the probe budget by four, up to 64×.
pub fn construct_with<T, G, F>(
    game: &G,
    solver: &F,
    s0: G::Profile,
    config: &SatisficingConfig<T>,
    options: &PathOptions,
) -> Result<PathRecord<G::Profile, T>>
where
    T: Scalar,
    G: SatisficingGame<T>,
    F: FreezeSolve<T, G::Profile>,
{
    if options.max_steps == 0 {
        return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
    }
    if options.budget == 0 {
        return Err(Error::InvalidArgument("sample budget must be positive".into()));
    }
    if config.partition.num_players() != game.num_players() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} players, game has {}",
            config.partition.num_players(),
            game.num_players()
        )));
    }
    let groups = config.partition.len();
    let tol = (config.epsilon / T::lit(2.0)).max(T::rounding_slack());
    let sat0 = game.satisfied_groups(&s0, config)?;
    let mut seen: HashMap<(Vec<usize>, Vec<i64>), usize> = HashMap::new();
    seen.insert(signature(&sat0, &game.flatten(&s0)), 1);
    let mut profiles = vec![s0];
    let mut per_step_satisfied = vec![sat0];
    let mut escalation = 1usize;

    let termination = loop {
        let step = profiles.len() - 1;
        let s = &profiles[step];
        let satisfied = &per_step_satisfied[step];
        if satisfied.len() == groups {
            break Termination::Equilibrium;
        }
        if step >= options.max_steps {
            break Termination::StepBudget;
        }
        let free = spec_from_satisfied(game.num_players(), satisfied, config).free_players;
        let jump = match solver.freeze_and_solve(s, &free, tol) {
            Ok(u) => {
                let sat_u = game.satisfied_groups(&u, config)?;
                Ok((u, sat_u))
            }
            Err(f) => Err(f),
        };
        let landed = matches!(&jump, Ok((_, sat_u)) if sat_u.len() == groups);
        let probe = if landed {
            None
        } else {
            let mut rng = substream(options.seed, &[step as u64, escalation as u64]);
            let budget = options.budget.saturating_mul(escalation);
            let mut best: Option<(G::Profile, Vec<usize>)> = None;
            for t in successors_given(game, s, satisfied, config, options.grid_step, budget, &mut rng)? {
                let sat_t = game.satisfied_groups(&t, config)?;
                let bound = best.as_ref().map_or(satisfied.len(), |(_, b)| b.len());
                if sat_t.len() < bound {
                    best = Some((t, sat_t));
                }
            }
            best
        };
        let (next, sat_next) = match (probe, jump) {
            (Some(found), _) => found,
            (None, Ok(found)) => found,
            (None, Err(f)) => {
                break Termination::SolverFailure {
                    step,
                    free_players: free,
                    reason: f.reason,
                    subgame: f.subgame,
                };
            }
        };
        let visits = seen.entry(signature(&sat_next, &game.flatten(&next))).or_insert(0);
        *visits += 1;
        if *visits > MAX_REVISITS {
            escalation = (escalation * 4).min(MAX_ESCALATION);
        }
        profiles.push(next);
        per_step_satisfied.push(sat_next);
    };

    let terminal_is_equilibrium = per_step_satisfied.last().is_some_and(|s| s.len() == groups);
    Ok(PathRecord {
        step_count: profiles.len() - 1,
        profiles,
        config: config.clone(),
        per_step_satisfied,
        terminal_is_equilibrium,
        termination,
    })
}

pub fn construct_path<T: Scalar, S: EquilibriumSolver<T>>(
    game: &NormalFormGame<T>,
    s0: &MixedProfile<T>,
    config: &SatisficingConfig<T>,
    solver: &S,
    options: &PathOptions,
) -> Result<PathRecord<MixedProfile<T>, T>> {
    game.check_profile(s0)?;
    construct_with(game, &FreezeAndSolve { game, solver }, s0.clone(), config, options)
}

/// Smallest index attaining the minimum recorded group count.
pub fn path_minimum_index<P, T: Scalar>(path: &PathRecord<P, T>) -> Result<usize> {
    path.per_step_satisfied
        .iter()
        .enumerate()
        .min_by_key(|(t, s)| (s.len(), *t))
        .map(|(t, _)| t)
        .ok_or(Error::EmptyPath)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::validate_path;
    use crate::solvers::fixtures::{matching_pennies, seeded};
    use crate::solvers::DeskSolver;

    #[test]
    fn equilibrium_start_is_length_one() {
        let g = matching_pennies();
        let cfg = SatisficingConfig::singletons(0.0, 2).unwrap();
        let u = MixedProfile::uniform(&[2, 2]);
        let p = construct_path(&g, &u, &cfg, &DeskSolver::default(), &PathOptions::default()).unwrap();
        assert_eq!(p.profiles.len(), 1);
        assert_eq!(p.step_count, 0);
        assert!(p.terminal_is_equilibrium);
        assert_eq!(p.termination, Termination::Equilibrium);
    }

    #[test]
    fn matching_pennies_reaches_uniform() {
        let g = matching_pennies();
        let cfg = SatisficingConfig::singletons(1e-6, 2).unwrap();
        let hh = MixedProfile::pure(&[2, 2], &[0, 0]).unwrap();
        let opts = PathOptions {
            max_steps: 50,
            ..PathOptions::default()
        };
        let p = construct_path(&g, &hh, &cfg, &DeskSolver::default(), &opts).unwrap();
        assert!(p.terminal_is_equilibrium);
        assert!(p.step_count <= 50);
        assert!(validate_path(&g, &p).unwrap());
        let last = p.last().unwrap();
        for i in 0..2 {
            assert!((last.dist(i)[0] - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn random_games_give_valid_paths() {
        for seed in 0..10 {
            let g = seeded(vec![2, 3, 2], seed);
            let cfg = SatisficingConfig::singletons(1e-6, 3).unwrap();
            let s0 = MixedProfile::pure(&[2, 3, 2], &[0, 0, 0]).unwrap();
            let opts = PathOptions {
                seed,
                ..PathOptions::default()
            };
            let p = construct_path(&g, &s0, &cfg, &DeskSolver::default(), &opts).unwrap();
            assert!(validate_path(&g, &p).unwrap());
            assert_eq!(
                p.terminal_is_equilibrium,
                g.is_eps_equilibrium(p.last().unwrap(), 1e-6).unwrap()
            );
        }
    }

    #[test]
    fn minimum_index() {
        let g = matching_pennies();
        let cfg = SatisficingConfig::singletons(0.0, 2).unwrap();
        let hh = MixedProfile::pure(&[2, 2], &[0, 0]).unwrap();
        let mut p = construct_path(&g, &hh, &cfg, &DeskSolver::default(), &PathOptions::default()).unwrap();
        p.per_step_satisfied = vec![vec![0, 1], vec![0], vec![0, 1, 2], vec![1]];
        assert_eq!(path_minimum_index(&p).unwrap(), 1);
        p.per_step_satisfied.clear();
        assert!(matches!(path_minimum_index(&p), Err(Error::EmptyPath)));
    }

    #[test]
    fn rejects_bad_options() {
        let g = matching_pennies();
        let cfg = SatisficingConfig::singletons(0.0, 2).unwrap();
        let hh = MixedProfile::pure(&[2, 2], &[0, 0]).unwrap();
        let zero = PathOptions {
            max_steps: 0,
            ..PathOptions::default()
        };
        assert!(construct_path(&g, &hh, &cfg, &DeskSolver::default(), &zero).is_err());
        let wrong = SatisficingConfig::singletons(0.0, 3).unwrap();
        assert!(construct_path(&g, &hh, &wrong, &DeskSolver::default(), &PathOptions::default()).is_err());
    }
}
