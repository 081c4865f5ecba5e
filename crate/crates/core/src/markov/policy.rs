use serde::{Deserialize, Serialize};

use super::StochasticGame;
use crate::error::{Error, Result};
use crate::profile::{normalize_distribution, MixedProfile};
use crate::Scalar;

/// `policies[i][x]` is player `i`'s action distribution in state `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Vec<T>>>", into = "Vec<Vec<Vec<T>>>", bound = "T: Scalar")]
pub struct StationaryPolicyProfile<T> {
    policies: Vec<Vec<Vec<T>>>,
}

impl<T: Scalar> TryFrom<Vec<Vec<Vec<T>>>> for StationaryPolicyProfile<T> {
    type Error = Error;
    fn try_from(policies: Vec<Vec<Vec<T>>>) -> Result<Self> {
        Self::new(policies)
    }
}

impl<T: Scalar> From<StationaryPolicyProfile<T>> for Vec<Vec<Vec<T>>> {
    fn from(p: StationaryPolicyProfile<T>) -> Self {
        p.policies
    }
}

impl<T: Scalar> StationaryPolicyProfile<T> {
    pub fn new(policies: Vec<Vec<Vec<T>>>) -> Result<Self> {
        if policies.is_empty() {
            return Err(Error::InvalidProfile("policy profile has no players".into()));
        }
        let states = policies[0].len();
        if states == 0 {
            return Err(Error::InvalidProfile("policy has no states".into()));
        }
        let mut out = Vec::with_capacity(policies.len());
        for (i, per_state) in policies.iter().enumerate() {
            if per_state.len() != states {
                return Err(Error::InvalidProfile(format!(
                    "player {i} has {} states, player 0 has {states}",
                    per_state.len()
                )));
            }
            let mut norm = Vec::with_capacity(states);
            for (x, d) in per_state.iter().enumerate() {
                if d.len() != per_state[0].len() {
                    return Err(Error::InvalidProfile(format!(
                        "player {i} has differing action counts across states (state {x})"
                    )));
                }
                norm.push(
                    normalize_distribution(d)
                        .map_err(|e| Error::InvalidProfile(format!("player {i}, state {x}: {e}")))?,
                );
            }
            out.push(norm);
        }
        Ok(Self { policies: out })
    }

    pub fn uniform(action_counts: &[usize], num_states: usize) -> Self {
        let policies = action_counts
            .iter()
            .map(|&m| vec![vec![T::one() / T::lit(m as f64); m]; num_states])
            .collect();
        Self { policies }
    }

    /// `actions[i][x]` is the action player `i` plays with certainty in `x`.
    pub fn pure(action_counts: &[usize], actions: &[Vec<usize>]) -> Result<Self> {
        if actions.len() != action_counts.len() {
            return Err(Error::InvalidProfile("one action list per player expected".into()));
        }
        let policies = actions
            .iter()
            .zip(action_counts)
            .map(|(per_state, &m)| {
                per_state
                    .iter()
                    .map(|&a| {
                        let mut d = vec![T::zero(); m];
                        *d.get_mut(a)
                            .ok_or_else(|| Error::InvalidProfile(format!("action {a} out of range")))? = T::one();
                        Ok(d)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(policies)
    }

    /// The same mixed profile in every state.
    pub fn from_mixed(profile: &MixedProfile<T>, num_states: usize) -> Self {
        let policies = profile
            .distributions()
            .iter()
            .map(|d| vec![d.clone(); num_states])
            .collect();
        Self { policies }
    }

    pub fn num_players(&self) -> usize {
        self.policies.len()
    }

    pub fn num_states(&self) -> usize {
        self.policies[0].len()
    }

    pub fn action_counts(&self) -> Vec<usize> {
        self.policies.iter().map(|p| p[0].len()).collect()
    }

    pub fn dist(&self, player: usize, state: usize) -> &[T] {
        &self.policies[player][state]
    }

    pub fn player_policy(&self, player: usize) -> &[Vec<T>] {
        &self.policies[player]
    }

    pub fn policies(&self) -> &[Vec<Vec<T>>] {
        &self.policies
    }

    /// Everyone's mixture in state `x`.
    pub fn state_profile(&self, x: usize) -> MixedProfile<T> {
        MixedProfile::from_normalized(self.policies.iter().map(|p| p[x].clone()).collect())
    }

    pub fn with_player_policy(&self, player: usize, policy: Vec<Vec<T>>) -> Result<Self> {
        let mut policies = self.policies.clone();
        policies[player] = policy;
        Self::new(policies)
    }

    pub(crate) fn replace_player(&self, player: usize, policy: Vec<Vec<T>>) -> Self {
        let mut policies = self.policies.clone();
        policies[player] = policy;
        Self { policies }
    }

    pub(crate) fn from_normalized(policies: Vec<Vec<Vec<T>>>) -> Self {
        Self { policies }
    }

    /// Shape check against a game.
    pub fn check(&self, game: &StochasticGame<T>) -> Result<()> {
        if self.num_players() != game.num_players()
            || self.num_states() != game.num_states()
            || self.action_counts() != game.action_counts()
        {
            return Err(Error::DimensionMismatch(format!(
                "policy has {} players x {} states with actions {:?}; game has {} x {} with {:?}",
                self.num_players(),
                self.num_states(),
                self.action_counts(),
                game.num_players(),
                game.num_states(),
                game.action_counts()
            )));
        }
        Ok(())
    }

    /// Whether `player`'s distributions agree in every state.
    pub fn same_policy(&self, other: &Self, player: usize, tol: T) -> bool {
        self.policies[player]
            .iter()
            .zip(&other.policies[player])
            .all(|(a, b)| a.iter().zip(b).all(|(&p, &q)| (p - q).abs() <= tol))
    }

    /// Product metric: the largest over states of the summed per-player L1
    /// distances.
    pub fn distance(&self, other: &Self) -> T {
        (0..self.num_states())
            .map(|x| {
                self.policies
                    .iter()
                    .zip(&other.policies)
                    .map(|(p, q)| p[x].iter().zip(&q[x]).map(|(&a, &b)| (a - b).abs()).sum::<T>())
                    .sum::<T>()
            })
            .fold(T::zero(), T::max)
    }

    /// Entries flattened player-major, then state, then action.
    pub fn flat(&self) -> Vec<T> {
        self.policies.iter().flatten().flatten().copied().collect()
    }
}
