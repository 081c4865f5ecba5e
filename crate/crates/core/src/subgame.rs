//! Sub-games obtained by freezing a set of players at fixed mixed strategies.

use crate::error::{Error, Result};
use crate::game::{marginalize, NormalFormGame};
use crate::profile::MixedProfile;
use crate::Scalar;

/// The game among `free_players` with everyone else held at `frozen`.
///
/// Players of the restricted game are the free players in ascending order;
/// `free_players[k]` is the base index of sub-game player `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubgameRestriction<T> {
    pub free_players: Vec<usize>,
    pub frozen: MixedProfile<T>,
    pub game: NormalFormGame<T>,
}

impl<T: Scalar> SubgameRestriction<T> {
    /// Lifts a sub-game profile back to a base-game profile, frozen players
    /// unchanged.
    pub fn embed(&self, sub_profile: &MixedProfile<T>) -> Result<MixedProfile<T>> {
        self.game.check_profile(sub_profile)?;
        let mut dists = self.frozen.distributions().to_vec();
        for (k, &i) in self.free_players.iter().enumerate() {
            dists[i] = sub_profile.dist(k).to_vec();
        }
        Ok(MixedProfile::from_normalized(dists))
    }

    /// The free players' part of a base profile.
    pub fn project(&self, profile: &MixedProfile<T>) -> MixedProfile<T> {
        MixedProfile::from_normalized(self.free_players.iter().map(|&i| profile.dist(i).to_vec()).collect())
    }
}

/// Sorts, dedups and range-checks a player set.
pub(crate) fn normalize_players(players: &[usize], num_players: usize) -> Result<Vec<usize>> {
    let mut out = players.to_vec();
    out.sort_unstable();
    out.dedup();
    if let Some(&bad) = out.iter().find(|&&p| p >= num_players) {
        return Err(Error::InvalidArgument(format!(
            "player {bad} out of range for {num_players} players"
        )));
    }
    Ok(out)
}

/// Exact expectation of the base payoffs over the frozen players' mixed
/// strategies; `frozen_profile` entries for free players are ignored.
pub fn restrict_subgame<T: Scalar>(
    game: &NormalFormGame<T>,
    frozen_profile: &MixedProfile<T>,
    free_players: &[usize],
) -> Result<SubgameRestriction<T>> {
    game.check_profile(frozen_profile).map_err(|e| match e {
        Error::DimensionMismatch(m) => Error::InvalidArgument(format!("frozen profile incomplete: {m}")),
        other => other,
    })?;
    let free = normalize_players(free_players, game.num_players())?;
    if free.is_empty() {
        return Err(Error::InvalidArgument("sub-game needs at least one free player".into()));
    }
    let counts = game.action_counts();
    let weights: Vec<Option<&[T]>> = (0..game.num_players())
        .map(|j| (!free.contains(&j)).then(|| frozen_profile.dist(j)))
        .collect();
    let sub_counts: Vec<usize> = free.iter().map(|&i| counts[i]).collect();
    let mut payoffs = Vec::with_capacity(free.len() * sub_counts.iter().product::<usize>());
    for &i in &free {
        payoffs.extend(marginalize(game.player_payoffs(i), counts, &weights));
    }
    Ok(SubgameRestriction {
        game: NormalFormGame::new(sub_counts, payoffs)?,
        free_players: free,
        frozen: frozen_profile.clone(),
    })
}
