use serde::{Deserialize, Serialize};

use super::{StationaryPolicyProfile, StochasticGame};
use crate::error::{Error, Result};
use crate::game::MAX_TENSOR_ENTRIES;
use crate::Scalar;

/// Largest compiled state space accepted.
pub const MAX_KSTEP_STATES: usize = 1_000_000;

/// A stochastic game whose policies may condition on the last `k` joint
/// actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct KStepGame<T> {
    pub base: StochasticGame<T>,
    pub k: usize,
}

/// A compiled state: base state plus the last `k` joint actions, most recent
/// first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KStepState {
    pub state: usize,
    pub history: Vec<usize>,
}

/// The stationary game over `X × J^k` and its index map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CompiledKStep<T> {
    pub game: StochasticGame<T>,
    pub k: usize,
    pub state_map: Vec<KStepState>,
}

impl<T: Scalar> KStepGame<T> {
    pub fn new(base: StochasticGame<T>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("history length k must be at least 1".into()));
        }
        Ok(Self { base, k })
    }

    /// `|X| · |J|^k`, or `None` on overflow.
    pub fn compiled_states(&self) -> Option<usize> {
        let j = self.base.num_joint_actions();
        (0..self.k).try_fold(self.base.num_states(), |acc, _| acc.checked_mul(j))
    }

    /// Index of `(x, s^{-1}, …, s^{-k})`: `x` slowest, `s^{-k}` fastest.
    pub fn state_index(&self, state: usize, history: &[usize]) -> usize {
        let j = self.base.num_joint_actions();
        history.iter().fold(state, |acc, &h| acc * j + h)
    }

    pub fn decode(&self, mut index: usize) -> KStepState {
        let j = self.base.num_joint_actions();
        let mut history = vec![0; self.k];
        for slot in history.iter_mut().rev() {
            *slot = index % j;
            index /= j;
        }
        KStepState { state: index, history }
    }
}

impl<T: Scalar> CompiledKStep<T> {
    /// The history-blind policy that plays `pi(x)` in every `(x, …)`.
    pub fn lift_policy(&self, pi: &StationaryPolicyProfile<T>) -> Result<StationaryPolicyProfile<T>> {
        if pi.num_players() != self.game.num_players() || pi.action_counts() != self.game.action_counts() {
            return Err(Error::DimensionMismatch("policy does not match the base game".into()));
        }
        let policies = (0..pi.num_players())
            .map(|i| {
                self.state_map
                    .iter()
                    .map(|s| {
                        pi.player_policy(i)
                            .get(s.state)
                            .cloned()
                            .ok_or_else(|| Error::DimensionMismatch("policy has too few states".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StationaryPolicyProfile::from_normalized(policies))
    }
}

/// Builds the stationary game on `Y = X × J^k`: from `(x, h_1, …, h_k)` under
/// joint action `s` the next state is `(x', s, h_1, …, h_{k−1})` with
/// probability `P(x, s)(x')`; stage payoffs are those of `x`.
pub fn compile_k_step<T: Scalar>(kgame: &KStepGame<T>) -> Result<CompiledKStep<T>> {
    if kgame.k == 0 {
        return Err(Error::InvalidArgument("history length k must be at least 1".into()));
    }
    let base = &kgame.base;
    let y_n = kgame
        .compiled_states()
        .filter(|&y| y <= MAX_KSTEP_STATES)
        .ok_or(Error::BudgetExceeded {
            what: "compiled k-step states",
            size: kgame.compiled_states().unwrap_or(usize::MAX),
            limit: MAX_KSTEP_STATES,
        })?;
    let j_n = base.num_joint_actions();
    let dense = y_n.saturating_mul(j_n).saturating_mul(y_n);
    if dense > MAX_TENSOR_ENTRIES {
        return Err(Error::BudgetExceeded {
            what: "compiled k-step kernel",
            size: dense,
            limit: MAX_TENSOR_ENTRIES,
        });
    }
    let n = base.num_players();
    let x_n = base.num_states();
    // dropping the oldest history entry and prepending s: index arithmetic
    let tail = y_n / x_n / j_n;
    let mut transition = vec![T::zero(); dense];
    let mut payoffs = Vec::with_capacity(y_n * j_n * n);
    let state_map: Vec<KStepState> = (0..y_n).map(|y| kgame.decode(y)).collect();
    for (y, ys) in state_map.iter().enumerate() {
        let kept = ys.history[..kgame.k - 1].iter().fold(0usize, |acc, &h| acc * j_n + h);
        for s in 0..j_n {
            let row = &mut transition[(y * j_n + s) * y_n..][..y_n];
            for (x2, &p) in base.transition_row(ys.state, s).iter().enumerate() {
                let target = (x2 * j_n + s) * tail + kept;
                row[target] = p;
            }
            payoffs.extend_from_slice(base.payoff_vector(ys.state, s));
        }
    }
    let game = StochasticGame::from_parts(
        base.action_counts().to_vec(),
        y_n,
        transition,
        payoffs,
        base.discounts().to_vec(),
    );
    Ok(CompiledKStep {
        game,
        k: kgame.k,
        state_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::tests::seeded_game;

    #[test]
    fn index_map_round_trips() {
        let kg = KStepGame::new(seeded_game(&[2, 3], 2, 0.5, 1), 2).unwrap();
        assert_eq!(kg.compiled_states(), Some(2 * 36));
        for y in 0..72 {
            let s = kg.decode(y);
            assert_eq!(kg.state_index(s.state, &s.history), y);
        }
        assert_eq!(
            kg.decode(37),
            KStepState {
                state: 1,
                history: vec![0, 1]
            }
        );
    }

    #[test]
    fn rows_sum_to_one_and_shift_history() {
        let kg = KStepGame::new(seeded_game(&[2, 2], 2, 0.5, 3), 2).unwrap();
        let c = compile_k_step(&kg).unwrap();
        let back: StochasticGame<f64> = serde_json::from_str(&serde_json::to_string(&c.game).unwrap()).unwrap();
        assert_eq!(back, c.game);
        for y in 0..c.game.num_states() {
            let from = &c.state_map[y];
            for s in 0..4 {
                let row = c.game.transition_row(y, s);
                for (t, &p) in row.iter().enumerate() {
                    let to = &c.state_map[t];
                    if p > 0.0 {
                        assert_eq!(to.history, vec![s, from.history[0]]);
                        assert_eq!(p, kg.base.transition_row(from.state, s)[to.state]);
                    }
                }
                assert_eq!(c.game.payoff_vector(y, s), kg.base.payoff_vector(from.state, s));
            }
        }
    }

    #[test]
    fn budgets() {
        assert!(KStepGame::new(seeded_game(&[2], 1, 0.5, 0), 0).is_err());
        let big = KStepGame::new(seeded_game(&[3, 3], 2, 0.5, 0), 7).unwrap();
        assert!(matches!(compile_k_step(&big), Err(Error::BudgetExceeded { .. })));
    }
}
