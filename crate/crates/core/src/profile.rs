use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// Sums further than this from one are rejected outright rather than
/// renormalized; smaller drift is treated as accumulated rounding.
const SUM_DRIFT_LIMIT: f64 = 1e-6;

/// Validates one distribution and returns its renormalized copy.
///
/// Entries below `-simplex_tol` are rejected; tiny negative entries are
/// clamped to zero before renormalizing.
pub fn normalize_distribution<T: Scalar>(dist: &[T]) -> Result<Vec<T>> {
    if dist.is_empty() {
        return Err(Error::InvalidProfile("empty distribution".into()));
    }
    let tol = T::simplex_tol();
    let mut total = T::zero();
    for &p in dist {
        if !p.is_finite() {
            return Err(Error::InvalidProfile(format!("non-finite entry {p}")));
        }
        if p < -tol {
            return Err(Error::InvalidProfile(format!("negative entry {p}")));
        }
        total += p.max(T::zero());
    }
    if (total - T::one()).abs() > T::lit(SUM_DRIFT_LIMIT).max(tol) {
        return Err(Error::InvalidProfile(format!("entries sum to {total}, expected 1")));
    }
    Ok(dist.iter().map(|&p| p.max(T::zero()) / total).collect())
}

/// One probability vector per player: a joint strategy of the mixed
/// extension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<T>>", into = "Vec<Vec<T>>", bound = "T: Scalar")]
pub struct MixedProfile<T> {
    dists: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<Vec<Vec<T>>> for MixedProfile<T> {
    type Error = Error;
    fn try_from(dists: Vec<Vec<T>>) -> Result<Self> {
        Self::new(dists)
    }
}

impl<T: Scalar> From<MixedProfile<T>> for Vec<Vec<T>> {
    fn from(p: MixedProfile<T>) -> Self {
        p.dists
    }
}

impl<T: Scalar> MixedProfile<T> {
    pub fn new(dists: Vec<Vec<T>>) -> Result<Self> {
        if dists.is_empty() {
            return Err(Error::InvalidProfile("profile has no players".into()));
        }
        let dists = dists.iter().map(|d| normalize_distribution(d)).collect::<Result<_>>()?;
        Ok(Self { dists })
    }

    /// Point masses on the given actions.
    pub fn pure(action_counts: &[usize], actions: &[usize]) -> Result<Self> {
        if action_counts.len() != actions.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} actions given for {} players",
                actions.len(),
                action_counts.len()
            )));
        }
        let dists = action_counts
            .iter()
            .zip(actions)
            .map(|(&m, &a)| {
                if a >= m {
                    return Err(Error::InvalidProfile(format!(
                        "action {a} out of range for {m} actions"
                    )));
                }
                let mut d = vec![T::zero(); m];
                d[a] = T::one();
                Ok(d)
            })
            .collect::<Result<_>>()?;
        Ok(Self { dists })
    }

    pub fn uniform(action_counts: &[usize]) -> Self {
        let dists = action_counts
            .iter()
            .map(|&m| vec![T::one() / T::lit(m as f64); m])
            .collect();
        Self { dists }
    }

    pub fn num_players(&self) -> usize {
        self.dists.len()
    }

    pub fn dist(&self, player: usize) -> &[T] {
        &self.dists[player]
    }

    pub fn distributions(&self) -> &[Vec<T>] {
        &self.dists
    }

    pub fn action_counts(&self) -> Vec<usize> {
        self.dists.iter().map(Vec::len).collect()
    }

    /// Copy with one player's distribution replaced.
    pub fn with_dist(&self, player: usize, dist: Vec<T>) -> Result<Self> {
        if dist.len() != self.dists[player].len() {
            return Err(Error::DimensionMismatch(format!(
                "player {player} has {} actions, got {}",
                self.dists[player].len(),
                dist.len()
            )));
        }
        let mut dists = self.dists.clone();
        dists[player] = normalize_distribution(&dist)?;
        Ok(Self { dists })
    }

    /// Probability of every pure joint action in row-major order, player 0
    /// slowest.
    pub fn joint_weights(&self) -> Vec<T> {
        let mut out = vec![T::one()];
        for d in &self.dists {
            let mut next = Vec::with_capacity(out.len() * d.len());
            for &w in &out {
                next.extend(d.iter().map(|&p| w * p));
            }
            out = next;
        }
        out
    }

    /// `Σ_i Σ_a |σ_i(a) − η_i(a)|`, the product metric on joint strategies.
    pub fn l1_distance(&self, other: &Self) -> T {
        self.dists
            .iter()
            .zip(&other.dists)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (*x - *y).abs()))
            .sum()
    }

    /// Whether one player's distribution is entrywise within `tol`.
    pub fn same_dist(&self, other: &Self, player: usize, tol: T) -> bool {
        self.dists[player]
            .iter()
            .zip(&other.dists[player])
            .all(|(a, b)| (*a - *b).abs() <= tol)
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.dists.len() == other.dists.len()
            && (0..self.dists.len())
                .all(|i| self.dists[i].len() == other.dists[i].len() && self.same_dist(other, i, tol))
    }

    /// Flattened entries, player-major.
    pub fn flat(&self) -> Vec<T> {
        self.dists.iter().flatten().copied().collect()
    }

    pub(crate) fn from_normalized(dists: Vec<Vec<T>>) -> Self {
        Self { dists }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renormalizes_small_drift_and_clamps() {
        let p = MixedProfile::new(vec![vec![0.5 + 1e-10, 0.5, -1e-11]]).unwrap();
        let d = p.dist(0);
        assert_eq!(d[2], 0.0);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_and_bad_sums() {
        assert!(MixedProfile::new(vec![vec![1.1, -0.1]]).is_err());
        assert!(MixedProfile::new(vec![vec![0.4, 0.4]]).is_err());
        assert!(MixedProfile::new(vec![vec![f64::NAN, 1.0]]).is_err());
        assert!(MixedProfile::<f64>::new(vec![vec![]]).is_err());
        assert!(MixedProfile::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn joint_weights_are_products() {
        let p = MixedProfile::<f64>::new(vec![vec![0.25, 0.75], vec![0.1, 0.2, 0.7]]).unwrap();
        let w = p.joint_weights();
        assert_eq!(w.len(), 6);
        assert!((w[0] - 0.025).abs() < 1e-15);
        assert!((w[5] - 0.525).abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_rejects_out_of_range() {
        assert!(MixedProfile::<f64>::pure(&[2, 2], &[0, 2]).is_err());
        assert!(MixedProfile::<f64>::pure(&[2, 2], &[0]).is_err());
        let p = MixedProfile::<f32>::pure(&[2, 3], &[1, 2]).unwrap();
        assert_eq!(p.dist(1), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn json_round_trip_validates() {
        let p: MixedProfile<f64> = serde_json::from_str("[[0.5,0.5],[1,0]]").unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "[[0.5,0.5],[1.0,0.0]]");
        assert!(serde_json::from_str::<MixedProfile<f64>>("[[0.5,0.2]]").is_err());
    }
}
