//! Finite normal-form games and their mixed extensions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::SatisficingConfig;
use crate::profile::MixedProfile;
use crate::Scalar;

/// Largest dense payoff tensor accepted (entries, all players).
pub const MAX_TENSOR_ENTRIES: usize = 10_000_000;

/// JSON layout: `{"players": n, "actions": [m_0, ...], "payoffs": [...]}`
/// with `payoffs` of length `n · Π m_i`, player-major outer and joint action
/// row-major inner (player 0's action varies slowest).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec<T> {
    pub players: usize,
    pub actions: Vec<usize>,
    pub payoffs: Vec<T>,
}

/// A finite game `(I, (S_i), (g_i))` with a dense payoff tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameSpec<T>", into = "GameSpec<T>", bound = "T: Scalar")]
pub struct NormalFormGame<T> {
    action_counts: Vec<usize>,
    num_joint: usize,
    payoffs: Vec<T>,
}

impl<T: Scalar> TryFrom<GameSpec<T>> for NormalFormGame<T> {
    type Error = Error;
    fn try_from(spec: GameSpec<T>) -> Result<Self> {
        if spec.players != spec.actions.len() {
            return Err(Error::InvalidGame(format!(
                "\"players\" is {} but \"actions\" lists {} players",
                spec.players,
                spec.actions.len()
            )));
        }
        Self::new(spec.actions, spec.payoffs)
    }
}

impl<T: Scalar> From<NormalFormGame<T>> for GameSpec<T> {
    fn from(g: NormalFormGame<T>) -> Self {
        GameSpec {
            players: g.action_counts.len(),
            actions: g.action_counts,
            payoffs: g.payoffs,
        }
    }
}

/// Number of joint actions, or an error past the tensor budget.
pub(crate) fn joint_count(action_counts: &[usize], per_joint: usize) -> Result<usize> {
    let mut joint: usize = 1;
    for &m in action_counts {
        joint = joint
            .checked_mul(m)
            .filter(|j| j.saturating_mul(per_joint) <= MAX_TENSOR_ENTRIES)
            .ok_or(Error::BudgetExceeded {
                what: "payoff tensor",
                size: usize::MAX,
                limit: MAX_TENSOR_ENTRIES,
            })?;
    }
    Ok(joint)
}

impl<T: Scalar> NormalFormGame<T> {
    /// `payoffs` uses the JSON ordering: player-major, then joint action.
    pub fn new(action_counts: Vec<usize>, payoffs: Vec<T>) -> Result<Self> {
        if action_counts.is_empty() {
            return Err(Error::InvalidGame("a game needs at least one player".into()));
        }
        if let Some(i) = action_counts.iter().position(|&m| m == 0) {
            return Err(Error::InvalidGame(format!("player {i} has no actions")));
        }
        let n = action_counts.len();
        let num_joint = joint_count(&action_counts, n)?;
        if payoffs.len() != num_joint * n {
            return Err(Error::InvalidGame(format!(
                "expected {} payoff entries ({} players x {} joint actions), got {}",
                num_joint * n,
                n,
                num_joint,
                payoffs.len()
            )));
        }
        if let Some(bad) = payoffs.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGame(format!("non-finite payoff {bad}")));
        }
        Ok(Self {
            action_counts,
            num_joint,
            payoffs,
        })
    }

    /// Builds the tensor from `f(player, joint_actions)`.
    pub fn from_fn(action_counts: Vec<usize>, mut f: impl FnMut(usize, &[usize]) -> T) -> Result<Self> {
        let n = action_counts.len();
        let num_joint = joint_count(&action_counts, n.max(1))?;
        let mut payoffs = vec![T::zero(); num_joint * n];
        let mut actions = vec![0usize; n];
        for j in 0..num_joint {
            for (i, slot) in (0..n).map(|i| (i, i * num_joint + j)) {
                payoffs[slot] = f(i, &actions);
            }
            advance(&mut actions, &action_counts);
        }
        Self::new(action_counts, payoffs)
    }

    /// Two-player game from row and column payoff matrices.
    pub fn bimatrix(row: &[Vec<T>], col: &[Vec<T>]) -> Result<Self> {
        let m = row.len();
        let k = row.first().map_or(0, Vec::len);
        if col.len() != m || row.iter().chain(col).any(|r| r.len() != k) {
            return Err(Error::InvalidGame("bimatrix shapes differ".into()));
        }
        Self::from_fn(
            vec![m, k],
            |i, a| if i == 0 { row[a[0]][a[1]] } else { col[a[0]][a[1]] },
        )
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn num_joint_actions(&self) -> usize {
        self.num_joint
    }

    /// Player `i`'s slice of the tensor, indexed by joint action.
    pub fn player_payoffs(&self, player: usize) -> &[T] {
        &self.payoffs[player * self.num_joint..(player + 1) * self.num_joint]
    }

    pub fn payoffs(&self) -> &[T] {
        &self.payoffs
    }

    pub fn joint_index(&self, actions: &[usize]) -> usize {
        actions
            .iter()
            .zip(&self.action_counts)
            .fold(0, |acc, (&a, &m)| acc * m + a)
    }

    pub fn joint_actions(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.action_counts.len()];
        for (slot, &m) in out.iter_mut().zip(&self.action_counts).rev() {
            *slot = index % m;
            index /= m;
        }
        out
    }

    /// `g_i(a)` for a pure joint action.
    pub fn payoff(&self, player: usize, actions: &[usize]) -> T {
        self.player_payoffs(player)[self.joint_index(actions)]
    }

    /// Largest absolute payoff over all players and outcomes.
    pub fn max_abs_payoff(&self) -> T {
        crate::scalar::max_abs(&self.payoffs)
    }

    /// `max − min` over all payoff entries; no ε-gap can exceed it.
    pub fn payoff_spread(&self) -> T {
        let (lo, hi) = self
            .payoffs
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &p| {
                (lo.min(p), hi.max(p))
            });
        hi - lo
    }

    pub fn check_profile(&self, profile: &MixedProfile<T>) -> Result<()> {
        let counts = profile.action_counts();
        if counts != self.action_counts {
            return Err(Error::DimensionMismatch(format!(
                "profile shape {counts:?} does not match game actions {:?}",
                self.action_counts
            )));
        }
        Ok(())
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.num_players() {
            return Err(Error::DimensionMismatch(format!(
                "player {player} out of range for {} players",
                self.num_players()
            )));
        }
        Ok(())
    }

    /// `g̃_i(σ) = Σ_a g_i(a) Π_j σ_j(a_j)`.
    pub fn expected_payoff(&self, profile: &MixedProfile<T>, player: usize) -> Result<T> {
        self.check_profile(profile)?;
        self.check_player(player)?;
        let values = self.action_values_unchecked(profile, player);
        Ok(values.iter().zip(profile.dist(player)).map(|(&v, &p)| v * p).sum())
    }

    /// Expected payoff of each of `player`'s pure actions against the others'
    /// mixed strategies.
    pub fn action_values(&self, profile: &MixedProfile<T>, player: usize) -> Result<Vec<T>> {
        self.check_profile(profile)?;
        self.check_player(player)?;
        Ok(self.action_values_unchecked(profile, player))
    }

    pub(crate) fn action_values_unchecked(&self, profile: &MixedProfile<T>, player: usize) -> Vec<T> {
        let weights: Vec<Option<&[T]>> = (0..self.num_players())
            .map(|j| (j != player).then(|| profile.dist(j)))
            .collect();
        marginalize(self.player_payoffs(player), &self.action_counts, &weights)
    }

    /// `sup_t g̃_i(t, σ_{-i})`. Over a simplex the payoff is linear in the
    /// player's own strategy, so the supremum is attained at a pure action.
    pub fn best_response_value(&self, profile: &MixedProfile<T>, player: usize) -> Result<T> {
        let values = self.action_values(profile, player)?;
        Ok(values.iter().copied().fold(T::neg_infinity(), T::max))
    }

    /// `best_response_value − expected_payoff`, never negative.
    pub fn regret(&self, profile: &MixedProfile<T>, player: usize) -> Result<T> {
        let values = self.action_values(profile, player)?;
        Ok(regret_from_values(&values, profile.dist(player)))
    }

    pub fn is_eps_best_response(&self, profile: &MixedProfile<T>, player: usize, epsilon: T) -> Result<bool> {
        Ok(self.regret(profile, player)? <= epsilon + T::rounding_slack())
    }

    pub fn is_eps_equilibrium(&self, profile: &MixedProfile<T>, epsilon: T) -> Result<bool> {
        for i in 0..self.num_players() {
            if !self.is_eps_best_response(profile, i, epsilon)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Largest regret over players; zero exactly at an equilibrium.
    pub fn residual(&self, profile: &MixedProfile<T>) -> Result<T> {
        self.check_profile(profile)?;
        Ok((0..self.num_players())
            .map(|i| regret_from_values(&self.action_values_unchecked(profile, i), profile.dist(i)))
            .fold(T::zero(), T::max))
    }

    /// Which players are ε-best responders, as a mask.
    pub fn satisfied_players(&self, profile: &MixedProfile<T>, epsilon: T) -> Result<Vec<bool>> {
        self.check_profile(profile)?;
        let bound = epsilon + T::rounding_slack();
        Ok((0..self.num_players())
            .map(|i| regret_from_values(&self.action_values_unchecked(profile, i), profile.dist(i)) <= bound)
            .collect())
    }

    /// Indices of groups whose members all ε-best-respond; its length is the
    /// group count `N_ε`.
    pub fn satisfied_groups(&self, profile: &MixedProfile<T>, config: &SatisficingConfig<T>) -> Result<Vec<usize>> {
        if config.partition.num_players() != self.num_players() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} players, game has {}",
                config.partition.num_players(),
                self.num_players()
            )));
        }
        let mask = self.satisfied_players(profile, config.epsilon)?;
        Ok(config
            .partition
            .groups()
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().all(|&i| mask[i]))
            .map(|(k, _)| k)
            .collect())
    }

    pub fn group_count(&self, profile: &MixedProfile<T>, config: &SatisficingConfig<T>) -> Result<usize> {
        Ok(self.satisfied_groups(profile, config)?.len())
    }
}

pub(crate) fn regret_from_values<T: Scalar>(values: &[T], dist: &[T]) -> T {
    let best = values.iter().copied().fold(T::neg_infinity(), T::max);
    let got: T = values.iter().zip(dist).map(|(&v, &p)| v * p).sum();
    (best - got).max(T::zero())
}

/// Odometer increment over a row-major index, last coordinate fastest.
pub(crate) fn advance(idx: &mut [usize], dims: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// Sums a row-major tensor over every axis that carries a weight vector,
/// leaving a row-major tensor over the unweighted axes (in their original
/// order).
pub(crate) fn marginalize<T: Scalar>(values: &[T], dims: &[usize], weights: &[Option<&[T]>]) -> Vec<T> {
    let kept: Vec<usize> = (0..dims.len()).filter(|&k| weights[k].is_none()).collect();
    let out_len: usize = kept.iter().map(|&k| dims[k]).product();
    let mut out = vec![T::zero(); out_len];
    let mut idx = vec![0usize; dims.len()];
    for &v in values {
        let mut w = T::one();
        let mut o = 0usize;
        for k in 0..dims.len() {
            match weights[k] {
                Some(p) => w *= p[idx[k]],
                None => o = o * dims[k] + idx[k],
            }
        }
        if w != T::zero() {
            out[o] += w * v;
        }
        advance(&mut idx, dims);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn matching_pennies() -> NormalFormGame<f64> {
        NormalFormGame::bimatrix(&[vec![1.0, -1.0], vec![-1.0, 1.0]], &[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(NormalFormGame::<f64>::new(vec![], vec![]).is_err());
        assert!(NormalFormGame::<f64>::new(vec![2, 0], vec![]).is_err());
        assert!(NormalFormGame::new(vec![2, 2], vec![0.0; 7]).is_err());
        assert!(NormalFormGame::new(vec![2], vec![0.0, f64::INFINITY]).is_err());
        assert!(matches!(
            NormalFormGame::<f64>::new(vec![1000, 1000, 1000], vec![]),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn joint_index_round_trip() {
        let g = NormalFormGame::new(vec![2, 3, 4], vec![0.0; 72]).unwrap();
        for j in 0..24 {
            assert_eq!(g.joint_index(&g.joint_actions(j)), j);
        }
        assert_eq!(g.joint_index(&[1, 0, 0]), 12);
    }

    #[test]
    fn matching_pennies_uniform_is_zero() {
        let g = matching_pennies();
        let u = MixedProfile::uniform(g.action_counts());
        assert_eq!(g.expected_payoff(&u, 0).unwrap(), 0.0);
        assert_eq!(g.expected_payoff(&u, 1).unwrap(), 0.0);
        assert_eq!(g.best_response_value(&u, 0).unwrap(), 0.0);
        assert!(g.is_eps_equilibrium(&u, 0.0).unwrap());
    }

    #[test]
    fn matching_pennies_pure_heads() {
        let g = matching_pennies();
        let hh = MixedProfile::pure(g.action_counts(), &[0, 0]).unwrap();
        assert_eq!(g.best_response_value(&hh, 0).unwrap(), 1.0);
        assert!(g.is_eps_best_response(&hh, 0, 0.0).unwrap());
        assert!(!g.is_eps_best_response(&hh, 1, 0.0).unwrap());
        assert_eq!(g.regret(&hh, 1).unwrap(), 2.0);
        assert!(!g.is_eps_equilibrium(&hh, 0.0).unwrap());
        assert!(g.is_eps_equilibrium(&hh, 2.0).unwrap());
    }

    #[test]
    fn satisfied_groups_examples() {
        let g = matching_pennies();
        let u = MixedProfile::uniform(g.action_counts());
        let single = SatisficingConfig::singletons(0.0, 2).unwrap();
        assert_eq!(g.satisfied_groups(&u, &single).unwrap(), vec![0, 1]);
        let hh = MixedProfile::pure(g.action_counts(), &[0, 0]).unwrap();
        let whole = SatisficingConfig::new(0.0, crate::GroupPartition::whole(2)).unwrap();
        assert!(g.satisfied_groups(&hh, &whole).unwrap().is_empty());
        let loose = SatisficingConfig::singletons(g.payoff_spread(), 2).unwrap();
        assert_eq!(g.group_count(&hh, &loose).unwrap(), 2);
        let wrong = SatisficingConfig::singletons(0.0, 3).unwrap();
        assert!(g.satisfied_groups(&hh, &wrong).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = matching_pennies();
        let p = MixedProfile::uniform(&[3, 2]);
        assert!(matches!(g.expected_payoff(&p, 0), Err(Error::DimensionMismatch(_))));
        let u = MixedProfile::uniform(&[2, 2]);
        assert!(g.expected_payoff(&u, 2).is_err());
    }

    #[test]
    fn json_schema_round_trip() {
        let g = matching_pennies();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(
            s,
            r#"{"players":2,"actions":[2,2],"payoffs":[1.0,-1.0,-1.0,1.0,-1.0,1.0,1.0,-1.0]}"#
        );
        let back: NormalFormGame<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"players":2,"actions":[2,2],"payoffs":[1.0]}"#;
        let err = serde_json::from_str::<NormalFormGame<f64>>(bad).unwrap_err();
        assert!(err.to_string().contains("payoff entries"));
    }

    #[test]
    fn single_precision_instance() {
        let g = NormalFormGame::<f32>::bimatrix(&[vec![1.0, 0.0]], &[vec![0.0, 1.0]]).unwrap();
        let p = MixedProfile::<f32>::uniform(g.action_counts());
        assert!((g.expected_payoff(&p, 1).unwrap() - 0.5).abs() < 1e-6);
        assert!(g.is_eps_best_response(&p, 0, 0.0).unwrap());
    }
}
