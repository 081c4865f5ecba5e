use serde::{Deserialize, Serialize};

use crate::partition::SatisficingConfig;
use crate::Scalar;

/// Why path construction stopped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// The last profile is an ε-equilibrium.
    Equilibrium,
    /// `max_steps` steps were taken without reaching one.
    StepBudget,
    /// A sub-game solve failed and no group-count decrease was available.
    SolverFailure {
        step: usize,
        free_players: Vec<usize>,
        reason: String,
        subgame: serde_json::Value,
    },
}

/// A finite satisficing path together with the satisfied groups at every
/// profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "P: Serialize, T: Scalar",
    deserialize = "P: Deserialize<'de>, T: Scalar"
))]
pub struct PathRecord<P, T> {
    pub profiles: Vec<P>,
    pub config: SatisficingConfig<T>,
    pub per_step_satisfied: Vec<Vec<usize>>,
    pub terminal_is_equilibrium: bool,
    pub step_count: usize,
    pub termination: Termination,
}

impl<P, T: Scalar> PathRecord<P, T> {
    /// Group count `N_ε` along the path.
    pub fn group_counts(&self) -> Vec<usize> {
        self.per_step_satisfied.iter().map(Vec::len).collect()
    }

    pub fn last(&self) -> Option<&P> {
        self.profiles.last()
    }
}
