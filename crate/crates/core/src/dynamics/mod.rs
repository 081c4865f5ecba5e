//! Grouped satisficing dynamics: legality of steps and paths, admissible
//! successors, local-minimum and preservation checks, and the
//! freeze-and-solve path constructor.
//!
//! The operations are written once against [`SatisficingGame`], which the
//! mixed extension of a [`NormalFormGame`] implements directly and the
//! stationary Markov setting implements through
//! [`crate::markov::MarkovDynamics`].

mod construct;
mod legality;
mod path;
mod successors;
mod topology;

pub use construct::{
    construct_path, construct_with, path_minimum_index, FreezeAndSolve, FreezeSolve, PathOptions, SolveFailure,
};
pub use legality::{
    step_is_legal, step_is_legal_with, successor_spec, successor_spec_with, validate_path, validate_path_with,
    SuccessorSpec,
};
pub use path::{PathRecord, Termination};
pub use successors::{sample_blocks, sample_successors, sample_successors_with};
pub use topology::{
    check_preservation, check_preservation_with, is_local_minimum, is_local_minimum_with, LocalMinimum, Preservation,
};

use crate::error::Result;
use crate::game::NormalFormGame;
use crate::partition::SatisficingConfig;
use crate::profile::MixedProfile;
use crate::Scalar;

pub const DEFAULT_GRID_STEP: f64 = 0.1;
pub const DEFAULT_BUDGET: usize = 2000;
pub const DEFAULT_MAX_STEPS: usize = 100;

/// A game whose joint strategies are tuples of per-player blocks of simplex
/// points, with a notion of which groups are currently satisfied.
pub trait SatisficingGame<T: Scalar> {
    type Profile: Clone;

    fn num_players(&self) -> usize;

    /// Sorted indices of fully ε-best-responding groups.
    fn satisfied_groups(&self, profile: &Self::Profile, config: &SatisficingConfig<T>) -> Result<Vec<usize>>;

    /// Whether `player`'s strategy is unchanged between the two profiles,
    /// entrywise within the simplex tolerance.
    fn same_strategy(&self, a: &Self::Profile, b: &Self::Profile, player: usize) -> bool;

    /// Simplex dimensions making up one player's strategy.
    fn strategy_blocks(&self, player: usize) -> Vec<usize>;

    /// Copy of `profile` with `player`'s strategy replaced by `blocks`.
    fn with_strategy(&self, profile: &Self::Profile, player: usize, blocks: Vec<Vec<T>>) -> Self::Profile;

    /// All probabilities, flattened in a fixed order.
    fn flatten(&self, profile: &Self::Profile) -> Vec<T>;
}

impl<T: Scalar> SatisficingGame<T> for NormalFormGame<T> {
    type Profile = MixedProfile<T>;

    fn num_players(&self) -> usize {
        NormalFormGame::num_players(self)
    }

    fn satisfied_groups(&self, profile: &MixedProfile<T>, config: &SatisficingConfig<T>) -> Result<Vec<usize>> {
        NormalFormGame::satisfied_groups(self, profile, config)
    }

    fn same_strategy(&self, a: &MixedProfile<T>, b: &MixedProfile<T>, player: usize) -> bool {
        a.same_dist(b, player, T::simplex_tol())
    }

    fn strategy_blocks(&self, player: usize) -> Vec<usize> {
        vec![self.action_counts()[player]]
    }

    fn with_strategy(&self, profile: &MixedProfile<T>, player: usize, mut blocks: Vec<Vec<T>>) -> MixedProfile<T> {
        let mut dists = profile.distributions().to_vec();
        dists[player] = blocks.swap_remove(0);
        MixedProfile::from_normalized(dists)
    }

    fn flatten(&self, profile: &MixedProfile<T>) -> Vec<T> {
        profile.flat()
    }
}
