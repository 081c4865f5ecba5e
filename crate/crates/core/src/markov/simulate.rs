//! Forward simulation of stationary play.

use rand::Rng as _;

use super::{StationaryPolicyProfile, StochasticGame};
use crate::rng::Rng;
use crate::Scalar;

/// Index drawn from a probability vector by inversion.
pub fn sample_index<T: Scalar>(probs: &[T], rng: &mut Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p.as_f64();
        if u < acc {
            return k;
        }
    }
    // rounding left u above the total; fall back to the last positive entry
    probs.iter().rposition(|p| *p > T::zero()).unwrap_or(probs.len() - 1)
}

/// Joint action index drawn from everyone's mixture in state `x`.
pub fn sample_joint_action<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    x: usize,
    rng: &mut Rng,
) -> usize {
    let actions: Vec<usize> = (0..game.num_players())
        .map(|i| sample_index(pi.dist(i, x), rng))
        .collect();
    game.joint_index(&actions)
}

/// States visited over `steps` transitions starting at `x0` (length
/// `steps + 1`).
pub fn simulate_states<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    x0: usize,
    steps: usize,
    rng: &mut Rng,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = x0;
    out.push(x);
    for _ in 0..steps {
        let j = sample_joint_action(game, pi, x, rng);
        x = sample_index(game.transition_row(x, j), rng);
        out.push(x);
    }
    out
}

/// State reached after `steps` transitions from `x0`.
pub fn terminal_state<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    x0: usize,
    steps: usize,
    rng: &mut Rng,
) -> usize {
    let mut x = x0;
    for _ in 0..steps {
        let j = sample_joint_action(game, pi, x, rng);
        x = sample_index(game.transition_row(x, j), rng);
    }
    x
}
