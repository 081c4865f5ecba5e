use serde::{Deserialize, Serialize};

use super::freeze::freeze_to;
use super::{StationaryPolicyProfile, StochasticGame};
use crate::error::{Error, Result};
use crate::solvers::argmax;
use crate::{sup_distance, Scalar};

/// Hard stop for value iteration when the requested tolerance sits below
/// floating-point resolution.
const MAX_SWEEPS: usize = 1_000_000;

/// `values[i][x]`: player `i`'s discounted value from state `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent, bound = "T: Scalar")]
pub struct ValueTable<T> {
    pub values: Vec<Vec<T>>,
}

impl<T: Scalar> ValueTable<T> {
    pub fn player(&self, i: usize) -> &[T] {
        &self.values[i]
    }
}

fn check_tol<T: Scalar>(tol: T) -> Result<()> {
    if tol.is_finite() && tol > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

fn check_player<T: Scalar>(game: &StochasticGame<T>, player: usize) -> Result<()> {
    if player < game.num_players() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "player {player} out of range for {} players",
            game.num_players()
        )))
    }
}

/// Expected stage payoff per state and the state-to-state kernel induced by
/// `pi`, for one player.
pub(crate) fn policy_chain<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    player: usize,
) -> (Vec<T>, Vec<T>) {
    let x_n = game.num_states();
    let mut reward = vec![T::zero(); x_n];
    let mut kernel = vec![T::zero(); x_n * x_n];
    for x in 0..x_n {
        let weights = pi.state_profile(x).joint_weights();
        for (j, &w) in weights.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            reward[x] += w * game.payoff(x, j, player);
            for (k, &p) in kernel[x * x_n..][..x_n].iter_mut().zip(game.transition_row(x, j)) {
                *k += w * p;
            }
        }
    }
    (reward, kernel)
}

fn chain_step<T: Scalar>(reward: &[T], kernel: &[T], gamma: T, v: &[T]) -> Vec<T> {
    let x_n = reward.len();
    (0..x_n)
        .map(|x| {
            let next: T = kernel[x * x_n..][..x_n].iter().zip(v).map(|(&p, &f)| p * f).sum();
            reward[x] + gamma * next
        })
        .collect()
}

/// Iterates a γ-contraction from zero until successive iterates are within
/// `tol·(1−γ)/γ`, which puts the last iterate within `tol` of the fixed
/// point. With `γ = 0` a single application is exact.
pub(crate) fn iterate_contraction<T: Scalar>(
    x_n: usize,
    gamma: T,
    tol: T,
    mut op: impl FnMut(&[T]) -> Vec<T>,
) -> Vec<T> {
    let mut v = vec![T::zero(); x_n];
    let threshold = tol * (T::one() - gamma) / gamma;
    for _ in 0..MAX_SWEEPS {
        let next = op(&v);
        let change = sup_distance(&next, &v);
        v = next;
        if gamma == T::zero() || change <= threshold {
            break;
        }
    }
    v
}

/// One application of the policy's value operator for `player`.
pub fn apply_value_operator<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    player: usize,
    values: &[T],
) -> Result<Vec<T>> {
    pi.check(game)?;
    check_player(game, player)?;
    if values.len() != game.num_states() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {} states",
            values.len(),
            game.num_states()
        )));
    }
    let (reward, kernel) = policy_chain(game, pi, player);
    Ok(chain_step(&reward, &kernel, game.discount(player), values))
}

/// Discounted value of `pi` for `player`, within `tol` in sup norm.
pub fn evaluate_policy<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    player: usize,
    tol: T,
) -> Result<Vec<T>> {
    pi.check(game)?;
    check_player(game, player)?;
    check_tol(tol)?;
    let (reward, kernel) = policy_chain(game, pi, player);
    let gamma = game.discount(player);
    Ok(iterate_contraction(game.num_states(), gamma, tol, |v| {
        chain_step(&reward, &kernel, gamma, v)
    }))
}

pub fn evaluate_all<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    tol: T,
) -> Result<ValueTable<T>> {
    let values = (0..game.num_players())
        .map(|i| evaluate_policy(game, pi, i, tol))
        .collect::<Result<_>>()?;
    Ok(ValueTable { values })
}

/// Optimal values and a greedy deterministic policy of a one-player game.
pub(crate) fn solve_mdp<T: Scalar>(mdp: &StochasticGame<T>, tol: T) -> (Vec<T>, Vec<usize>) {
    let x_n = mdp.num_states();
    let m = mdp.action_counts()[0];
    let gamma = mdp.discount(0);
    let q = |v: &[T], x: usize| -> Vec<T> {
        (0..m)
            .map(|a| {
                let next: T = mdp.transition_row(x, a).iter().zip(v).map(|(&p, &f)| p * f).sum();
                mdp.payoff(x, a, 0) + gamma * next
            })
            .collect()
    };
    let values = iterate_contraction(x_n, gamma, tol, |v| {
        (0..x_n)
            .map(|x| q(v, x).into_iter().fold(T::neg_infinity(), T::max))
            .collect()
    });
    let greedy = (0..x_n).map(|x| argmax(&q(&values, x))).collect();
    (values, greedy)
}

/// Best value per state `player` can reach against the others' stationary
/// mixtures, together with a greedy deterministic response.
pub fn induced_mdp_best_response<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    player: usize,
    tol: T,
) -> Result<(Vec<T>, Vec<usize>)> {
    pi.check(game)?;
    check_player(game, player)?;
    check_tol(tol)?;
    Ok(solve_mdp(&freeze_to(game, pi, &[player]), tol))
}

pub fn induced_mdp_best_value<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    player: usize,
    tol: T,
) -> Result<Vec<T>> {
    Ok(induced_mdp_best_response(game, pi, player, tol)?.0)
}

/// Per player, the largest shortfall over states between the best response
/// value and the value of `pi`.
pub fn stationary_regrets<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    tol: T,
) -> Result<Vec<T>> {
    (0..game.num_players())
        .map(|i| {
            let h = evaluate_policy(game, pi, i, tol)?;
            let best = induced_mdp_best_value(game, pi, i, tol)?;
            Ok(best.iter().zip(&h).map(|(&b, &v)| b - v).fold(T::zero(), T::max))
        })
        .collect()
}

/// Largest stationary regret over players.
pub fn stationary_residual<T: Scalar>(game: &StochasticGame<T>, pi: &StationaryPolicyProfile<T>, tol: T) -> Result<T> {
    Ok(stationary_regrets(game, pi, tol)?.into_iter().fold(T::zero(), T::max))
}

/// Comparison slack for player `i`: both value computations may be off by
/// `tol` unless the discount is zero, in which case both are exact.
pub(crate) fn satisfaction_slack<T: Scalar>(game: &StochasticGame<T>, player: usize, tol: T) -> T {
    let eval = if game.discount(player) > T::zero() {
        T::lit(2.0) * tol
    } else {
        T::zero()
    };
    T::rounding_slack() + eval
}

/// Players whose policy is within `epsilon` of a best response in every
/// state.
pub fn stationary_satisfied_players<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    epsilon: T,
    tol: T,
) -> Result<Vec<usize>> {
    if !(epsilon >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be nonnegative, got {epsilon}"
        )));
    }
    let regrets = stationary_regrets(game, pi, tol)?;
    Ok(regrets
        .iter()
        .enumerate()
        .filter(|&(i, &r)| r <= epsilon + satisfaction_slack(game, i, tol))
        .map(|(i, _)| i)
        .collect())
}

pub fn is_markov_equilibrium<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    epsilon: T,
    tol: T,
) -> Result<bool> {
    Ok(stationary_satisfied_players(game, pi, epsilon, tol)?.len() == game.num_players())
}

/// `C = max_k Π_{j≠k} m_j`: bounds `Σ_s Σ_k |π_k(s_k) − σ_k(s_k)|` by `C`
/// times the summed per-player L1 distance in a state.
pub fn continuity_constant<T: Scalar>(game: &StochasticGame<T>) -> T {
    let counts = game.action_counts();
    let total: usize = counts.iter().product();
    let c = counts.iter().map(|&m| total / m).max().unwrap_or(1);
    T::lit(c as f64)
}

/// Lipschitz coefficient of `π ↦ h_i(π)` in sup norm against
/// [`StationaryPolicyProfile::distance`].
pub fn value_lipschitz_bound<T: Scalar>(game: &StochasticGame<T>, player: usize) -> T {
    let m = game.max_abs_payoff();
    let c = continuity_constant(game);
    let g = game.discount(player);
    let one = T::one();
    let x = T::lit(game.num_states() as f64);
    m * c / (one - g) * (one + g * x / (one - g))
}
