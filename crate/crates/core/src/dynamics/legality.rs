use serde::{Deserialize, Serialize};

use super::{PathRecord, SatisficingGame};
use crate::error::{Error, Result};
use crate::game::NormalFormGame;
use crate::partition::SatisficingConfig;
use crate::profile::MixedProfile;
use crate::Scalar;

/// Factorization of the admissible successor set: frozen players must repeat
/// their strategies, free players may move anywhere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuccessorSpec {
    pub frozen_players: Vec<usize>,
    pub free_players: Vec<usize>,
}

pub fn successor_spec_with<T: Scalar, G: SatisficingGame<T>>(
    game: &G,
    s: &G::Profile,
    config: &SatisficingConfig<T>,
) -> Result<SuccessorSpec> {
    let satisfied = game.satisfied_groups(s, config)?;
    Ok(spec_from_satisfied(game.num_players(), &satisfied, config))
}

pub(crate) fn spec_from_satisfied<T: Scalar>(
    n: usize,
    satisfied: &[usize],
    config: &SatisficingConfig<T>,
) -> SuccessorSpec {
    let frozen_players = config.partition.members_of(satisfied);
    let free_players = (0..n).filter(|i| frozen_players.binary_search(i).is_err()).collect();
    SuccessorSpec {
        frozen_players,
        free_players,
    }
}

/// Every group that fully ε-best-responds at `s` keeps all its members'
/// strategies at `s_next`.
pub fn step_is_legal_with<T: Scalar, G: SatisficingGame<T>>(
    game: &G,
    s: &G::Profile,
    s_next: &G::Profile,
    config: &SatisficingConfig<T>,
) -> Result<bool> {
    let satisfied = game.satisfied_groups(s, config)?;
    Ok(legal_given(game, &satisfied, s, s_next, config))
}

pub(crate) fn legal_given<T: Scalar, G: SatisficingGame<T>>(
    game: &G,
    satisfied: &[usize],
    s: &G::Profile,
    s_next: &G::Profile,
    config: &SatisficingConfig<T>,
) -> bool {
    satisfied
        .iter()
        .flat_map(|&g| config.partition.groups()[g].iter())
        .all(|&i| game.same_strategy(s, s_next, i))
}

/// Checks every step and every recorded satisfied set. Errors only on an
/// empty path or a structural mismatch.
pub fn validate_path_with<T: Scalar, G: SatisficingGame<T>>(
    game: &G,
    path: &PathRecord<G::Profile, T>,
) -> Result<bool> {
    if path.profiles.is_empty() {
        return Err(Error::EmptyPath);
    }
    if path.per_step_satisfied.len() != path.profiles.len() || path.step_count + 1 != path.profiles.len() {
        return Ok(false);
    }
    let config = &path.config;
    let mut prev: Option<Vec<usize>> = None;
    for (t, p) in path.profiles.iter().enumerate() {
        let sat = game.satisfied_groups(p, config)?;
        if sat != path.per_step_satisfied[t] {
            return Ok(false);
        }
        if let Some(prev_sat) = &prev {
            if !legal_given(game, prev_sat, &path.profiles[t - 1], p, config) {
                return Ok(false);
            }
        }
        prev = Some(sat);
    }
    Ok(true)
}

pub fn successor_spec<T: Scalar>(
    game: &NormalFormGame<T>,
    s: &MixedProfile<T>,
    config: &SatisficingConfig<T>,
) -> Result<SuccessorSpec> {
    successor_spec_with(game, s, config)
}

pub fn step_is_legal<T: Scalar>(
    game: &NormalFormGame<T>,
    s: &MixedProfile<T>,
    s_next: &MixedProfile<T>,
    config: &SatisficingConfig<T>,
) -> Result<bool> {
    game.check_profile(s_next)?;
    step_is_legal_with(game, s, s_next, config)
}

pub fn validate_path<T: Scalar>(game: &NormalFormGame<T>, path: &PathRecord<MixedProfile<T>, T>) -> Result<bool> {
    validate_path_with(game, path)
}
