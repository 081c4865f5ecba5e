use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// Partition of the player set into decision groups. A group keeps its
/// strategies only when every member is an ε-best responder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct GroupPartition {
    groups: Vec<Vec<usize>>,
    num_players: usize,
}

impl TryFrom<Vec<Vec<usize>>> for GroupPartition {
    type Error = Error;
    fn try_from(groups: Vec<Vec<usize>>) -> Result<Self> {
        let n = groups.iter().map(Vec::len).sum();
        Self::new(n, groups)
    }
}

impl From<GroupPartition> for Vec<Vec<usize>> {
    fn from(p: GroupPartition) -> Self {
        p.groups
    }
}

impl GroupPartition {
    /// Groups are sorted internally; group order is preserved.
    pub fn new(num_players: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; num_players];
        let mut sorted = Vec::with_capacity(groups.len());
        for mut g in groups {
            if g.is_empty() {
                return Err(Error::InvalidPartition("empty group".into()));
            }
            g.sort_unstable();
            for &p in &g {
                if p >= num_players {
                    return Err(Error::InvalidPartition(format!(
                        "player {p} out of range for {num_players} players"
                    )));
                }
                if std::mem::replace(&mut seen[p], true) {
                    return Err(Error::InvalidPartition(format!("player {p} appears twice")));
                }
            }
            sorted.push(g);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("player {missing} not covered")));
        }
        Ok(Self {
            groups: sorted,
            num_players,
        })
    }

    /// One group per player: the classical, ungrouped dynamics.
    pub fn singletons(num_players: usize) -> Self {
        Self {
            groups: (0..num_players).map(|i| vec![i]).collect(),
            num_players,
        }
    }

    /// Every player in one group.
    pub fn whole(num_players: usize) -> Self {
        Self {
            groups: vec![(0..num_players).collect()],
            num_players,
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    /// Sorted union of the given groups' members.
    pub fn members_of(&self, group_indices: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = group_indices
            .iter()
            .flat_map(|&g| self.groups[g].iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Tolerance and grouping that define one family of satisficing dynamics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SatisficingConfig<T> {
    pub epsilon: T,
    pub partition: GroupPartition,
}

impl<T: Scalar> SatisficingConfig<T> {
    pub fn new(epsilon: T, partition: GroupPartition) -> Result<Self> {
        if !(epsilon >= T::zero()) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be finite and nonnegative, got {epsilon}"
            )));
        }
        Ok(Self { epsilon, partition })
    }

    pub fn singletons(epsilon: T, num_players: usize) -> Result<Self> {
        Self::new(epsilon, GroupPartition::singletons(num_players))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_validation() {
        assert!(GroupPartition::new(3, vec![vec![0, 2], vec![1]]).is_ok());
        assert!(GroupPartition::new(3, vec![vec![0, 1]]).is_err());
        assert!(GroupPartition::new(2, vec![vec![0, 1], vec![1]]).is_err());
        assert!(GroupPartition::new(2, vec![vec![0, 1], vec![]]).is_err());
        assert!(GroupPartition::new(2, vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn members_are_sorted_union() {
        let p = GroupPartition::new(4, vec![vec![3, 1], vec![0], vec![2]]).unwrap();
        assert_eq!(p.groups()[0], vec![1, 3]);
        assert_eq!(p.members_of(&[0, 1]), vec![0, 1, 3]);
    }

    #[test]
    fn negative_epsilon_rejected() {
        assert!(SatisficingConfig::singletons(-1e-3, 2).is_err());
        assert!(SatisficingConfig::singletons(f64::NAN, 2).is_err());
        assert!(SatisficingConfig::singletons(0.0, 2).is_ok());
    }
}
