use super::{StationaryPolicyProfile, StochasticGame};
use crate::error::{Error, Result};
use crate::subgame::normalize_players;
use crate::Scalar;

/// The stochastic game among the free players with everyone else held at a
/// fixed stationary policy.
#[derive(Clone, Debug, PartialEq)]
pub struct FrozenSubgame<T> {
    /// `free_players[k]` is the base index of sub-game player `k`.
    pub free_players: Vec<usize>,
    pub base: StationaryPolicyProfile<T>,
    pub game: StochasticGame<T>,
}

impl<T: Scalar> FrozenSubgame<T> {
    pub fn embed(&self, sub: &StationaryPolicyProfile<T>) -> Result<StationaryPolicyProfile<T>> {
        sub.check(&self.game)?;
        let mut policies = self.base.policies().to_vec();
        for (k, &i) in self.free_players.iter().enumerate() {
            policies[i] = sub.player_policy(k).to_vec();
        }
        Ok(StationaryPolicyProfile::from_normalized(policies))
    }

    pub fn project(&self, pi: &StationaryPolicyProfile<T>) -> StationaryPolicyProfile<T> {
        StationaryPolicyProfile::from_normalized(
            self.free_players
                .iter()
                .map(|&i| pi.player_policy(i).to_vec())
                .collect(),
        )
    }
}

/// Kernel and payoffs of the free players' game, averaged exactly over the
/// other players' per-state mixtures. `free` must be sorted and nonempty.
pub(crate) fn freeze_to<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    free: &[usize],
) -> StochasticGame<T> {
    let n = game.num_players();
    let x_n = game.num_states();
    let counts = game.action_counts();
    let sub_counts: Vec<usize> = free.iter().map(|&i| counts[i]).collect();
    let sub_joint: usize = sub_counts.iter().product();
    let frozen: Vec<usize> = (0..n).filter(|i| free.binary_search(i).is_err()).collect();
    let mut transition = vec![T::zero(); x_n * sub_joint * x_n];
    let mut payoffs = vec![T::zero(); x_n * sub_joint * free.len()];
    for x in 0..x_n {
        game.for_each_joint(|j, a| {
            let w = frozen.iter().fold(T::one(), |acc, &k| acc * pi.dist(k, x)[a[k]]);
            if w == T::zero() {
                return;
            }
            let sub = free.iter().fold(0, |acc, &i| acc * counts[i] + a[i]);
            let row = &mut transition[(x * sub_joint + sub) * x_n..][..x_n];
            for (r, &p) in row.iter_mut().zip(game.transition_row(x, j)) {
                *r += w * p;
            }
            let pay = &mut payoffs[(x * sub_joint + sub) * free.len()..][..free.len()];
            for (slot, &i) in pay.iter_mut().zip(free) {
                *slot += w * game.payoff(x, j, i);
            }
        });
    }
    let discounts = free.iter().map(|&i| game.discount(i)).collect();
    StochasticGame::from_parts(sub_counts, x_n, transition, payoffs, discounts)
}

pub fn freeze_players_stochastic<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    frozen_players: &[usize],
) -> Result<FrozenSubgame<T>> {
    pi.check(game)?;
    let n = game.num_players();
    let frozen = normalize_players(frozen_players, n)?;
    if frozen.len() == n {
        return Err(Error::InvalidArgument("cannot freeze every player".into()));
    }
    let free: Vec<usize> = (0..n).filter(|i| frozen.binary_search(i).is_err()).collect();
    Ok(FrozenSubgame {
        game: freeze_to(game, pi, &free),
        free_players: free,
        base: pi.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::tests::seeded_game;

    #[test]
    fn empty_frozen_set_is_identity() {
        let g = seeded_game(&[2, 3], 3, 0.7, 1);
        let pi = StationaryPolicyProfile::uniform(&[2, 3], 3);
        let sub = freeze_players_stochastic(&g, &pi, &[]).unwrap();
        assert_eq!(sub.game, g);
    }

    #[test]
    fn pure_freeze_is_a_slice() {
        let g = seeded_game(&[2, 2], 2, 0.5, 2);
        let pi = StationaryPolicyProfile::pure(&[2, 2], &[vec![0, 1], vec![1, 0]]).unwrap();
        let sub = freeze_players_stochastic(&g, &pi, &[1]).unwrap();
        assert_eq!(sub.free_players, vec![0]);
        for x in 0..2 {
            let b = [1, 0][x];
            for a in 0..2 {
                let j = g.joint_index(&[a, b]);
                assert_eq!(sub.game.transition_row(x, a), g.transition_row(x, j));
                assert_eq!(sub.game.payoff(x, a, 0), g.payoff(x, j, 0));
            }
        }
    }

    #[test]
    fn freezing_everyone_fails() {
        let g = seeded_game(&[2, 2], 2, 0.5, 2);
        let pi = StationaryPolicyProfile::uniform(&[2, 2], 2);
        assert!(freeze_players_stochastic(&g, &pi, &[0, 1]).is_err());
        assert!(freeze_players_stochastic(&g, &pi, &[5]).is_err());
    }
}
