use serde::{Deserialize, Serialize};

use super::successors::successors_given;
use super::SatisficingGame;
use crate::error::Result;
use crate::game::NormalFormGame;
use crate::partition::SatisficingConfig;
use crate::profile::MixedProfile;
use crate::rng::substream;
use crate::Scalar;

/// Sampled verdict on whether `N_ε` can drop in one admissible step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LocalMinimum<P> {
    CertifiedMin,
    Counterexample { successor: P },
}

impl<P> LocalMinimum<P> {
    pub fn is_certified(&self) -> bool {
        matches!(self, LocalMinimum::CertifiedMin)
    }
}

/// Sampled verdict on whether every admissible step keeps each satisfied
/// group satisfied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Preservation<P> {
    Preserved,
    Violated { successor: P, group: usize },
}

impl<P> Preservation<P> {
    pub fn is_preserved(&self) -> bool {
        matches!(self, Preservation::Preserved)
    }
}

pub fn is_local_minimum_with<T: Scalar, G: SatisficingGame<T>>(
    game: &G,
    s: &G::Profile,
    config: &SatisficingConfig<T>,
    grid_step: f64,
    budget: usize,
    seed: u64,
) -> Result<LocalMinimum<G::Profile>> {
    let satisfied = game.satisfied_groups(s, config)?;
    let n_s = satisfied.len();
    let mut rng = substream(seed, &[]);
    for t in successors_given(game, s, &satisfied, config, grid_step, budget, &mut rng)? {
        if game.satisfied_groups(&t, config)?.len() < n_s {
            return Ok(LocalMinimum::Counterexample { successor: t });
        }
    }
    Ok(LocalMinimum::CertifiedMin)
}

pub fn check_preservation_with<T: Scalar, G: SatisficingGame<T>>(
    game: &G,
    s: &G::Profile,
    config: &SatisficingConfig<T>,
    grid_step: f64,
    budget: usize,
    seed: u64,
) -> Result<Preservation<G::Profile>> {
    let satisfied = game.satisfied_groups(s, config)?;
    let mut rng = substream(seed, &[]);
    for t in successors_given(game, s, &satisfied, config, grid_step, budget, &mut rng)? {
        let after = game.satisfied_groups(&t, config)?;
        if let Some(&group) = satisfied.iter().find(|g| after.binary_search(g).is_err()) {
            return Ok(Preservation::Violated { successor: t, group });
        }
    }
    Ok(Preservation::Preserved)
}

pub fn is_local_minimum<T: Scalar>(
    game: &NormalFormGame<T>,
    s: &MixedProfile<T>,
    config: &SatisficingConfig<T>,
    grid_step: f64,
    budget: usize,
    seed: u64,
) -> Result<LocalMinimum<MixedProfile<T>>> {
    game.check_profile(s)?;
    is_local_minimum_with(game, s, config, grid_step, budget, seed)
}

pub fn check_preservation<T: Scalar>(
    game: &NormalFormGame<T>,
    s: &MixedProfile<T>,
    config: &SatisficingConfig<T>,
    grid_step: f64,
    budget: usize,
    seed: u64,
) -> Result<Preservation<MixedProfile<T>>> {
    game.check_profile(s)?;
    check_preservation_with(game, s, config, grid_step, budget, seed)
}
