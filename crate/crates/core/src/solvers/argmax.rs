use super::{Method, SolverOutcome};
use crate::error::{Error, Result};
use crate::game::NormalFormGame;
use crate::profile::MixedProfile;
use crate::Scalar;

/// Lowest index attaining the maximum.
pub(crate) fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (a, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = a;
        }
    }
    best
}

/// A one-player game is solved by any maximizing action; ties go to the
/// lowest index.
pub fn solve_one_player<T: Scalar>(game: &NormalFormGame<T>) -> Result<SolverOutcome<T>> {
    if game.num_players() != 1 {
        return Err(Error::InvalidArgument(format!(
            "one-player solver given {} players",
            game.num_players()
        )));
    }
    let a = argmax(game.player_payoffs(0));
    let profile = MixedProfile::pure(game.action_counts(), &[a])?;
    Ok(SolverOutcome {
        method: Method::Argmax,
        residual: T::zero(),
        profile,
    })
}
