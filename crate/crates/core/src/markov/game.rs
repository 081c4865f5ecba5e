use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{advance, joint_count, NormalFormGame, MAX_TENSOR_ENTRIES};
use crate::Scalar;

/// JSON layout. `transition[x][j]` is the next-state distribution after
/// joint action `j` (row-major, player 0 slowest) in state `x`;
/// `payoffs[x][j]` holds one stage payoff per player.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticGameSpec<T> {
    pub players: usize,
    pub states: usize,
    pub actions: Vec<usize>,
    pub transition: Vec<Vec<Vec<T>>>,
    pub payoffs: Vec<Vec<Vec<T>>>,
    pub discounts: Vec<T>,
}

/// A finite-state discounted stochastic game with dense kernel and payoffs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "StochasticGameSpec<T>",
    into = "StochasticGameSpec<T>",
    bound = "T: Scalar"
)]
pub struct StochasticGame<T> {
    action_counts: Vec<usize>,
    num_states: usize,
    num_joint: usize,
    /// `[state][joint][next]`
    transition: Vec<T>,
    /// `[state][joint][player]`
    payoffs: Vec<T>,
    discounts: Vec<T>,
}

impl<T: Scalar> TryFrom<StochasticGameSpec<T>> for StochasticGame<T> {
    type Error = Error;
    fn try_from(spec: StochasticGameSpec<T>) -> Result<Self> {
        if spec.players != spec.actions.len() {
            return Err(Error::InvalidGame(format!(
                "\"players\" is {} but \"actions\" lists {} players",
                spec.players,
                spec.actions.len()
            )));
        }
        let shape_err = |what: &str| Error::InvalidGame(format!("{what} has the wrong shape"));
        if spec.transition.len() != spec.states || spec.payoffs.len() != spec.states {
            return Err(shape_err("transition or payoffs"));
        }
        let num_joint = joint_count(&spec.actions, 1)?;
        let mut transition = Vec::new();
        let mut payoffs = Vec::new();
        for (rows, pays) in spec.transition.into_iter().zip(spec.payoffs) {
            if rows.len() != num_joint || pays.len() != num_joint {
                return Err(shape_err("a state's joint-action table"));
            }
            for row in rows {
                if row.len() != spec.states {
                    return Err(shape_err("a transition row"));
                }
                transition.extend(row);
            }
            for p in pays {
                if p.len() != spec.players {
                    return Err(shape_err("a payoff vector"));
                }
                payoffs.extend(p);
            }
        }
        Self::new(spec.actions, spec.states, transition, payoffs, spec.discounts)
    }
}

impl<T: Scalar> From<StochasticGame<T>> for StochasticGameSpec<T> {
    fn from(g: StochasticGame<T>) -> Self {
        let (x_n, j_n, n) = (g.num_states, g.num_joint, g.action_counts.len());
        let transition = (0..x_n)
            .map(|x| (0..j_n).map(|j| g.transition_row(x, j).to_vec()).collect())
            .collect();
        let payoffs = (0..x_n)
            .map(|x| (0..j_n).map(|j| g.payoff_vector(x, j).to_vec()).collect())
            .collect();
        StochasticGameSpec {
            players: n,
            states: x_n,
            actions: g.action_counts,
            transition,
            payoffs,
            discounts: g.discounts,
        }
    }
}

impl<T: Scalar> StochasticGame<T> {
    /// Flat constructor: `transition` is `[state][joint][next]` and `payoffs`
    /// is `[state][joint][player]`.
    pub fn new(
        action_counts: Vec<usize>,
        num_states: usize,
        transition: Vec<T>,
        payoffs: Vec<T>,
        discounts: Vec<T>,
    ) -> Result<Self> {
        let n = action_counts.len();
        if n == 0 {
            return Err(Error::InvalidGame("a game needs at least one player".into()));
        }
        if num_states == 0 {
            return Err(Error::InvalidGame("a stochastic game needs at least one state".into()));
        }
        if let Some(i) = action_counts.iter().position(|&m| m == 0) {
            return Err(Error::InvalidGame(format!("player {i} has no actions")));
        }
        let num_joint = joint_count(&action_counts, 1)?;
        let kernel = num_states
            .checked_mul(num_joint)
            .and_then(|v| v.checked_mul(num_states))
            .filter(|&v| v <= MAX_TENSOR_ENTRIES)
            .ok_or(Error::BudgetExceeded {
                what: "transition kernel",
                size: num_states.saturating_mul(num_joint).saturating_mul(num_states),
                limit: MAX_TENSOR_ENTRIES,
            })?;
        if transition.len() != kernel {
            return Err(Error::InvalidGame(format!(
                "expected {kernel} transition entries, got {}",
                transition.len()
            )));
        }
        if payoffs.len() != num_states * num_joint * n {
            return Err(Error::InvalidGame(format!(
                "expected {} payoff entries, got {}",
                num_states * num_joint * n,
                payoffs.len()
            )));
        }
        if discounts.len() != n {
            return Err(Error::InvalidGame(format!(
                "expected {n} discounts, got {}",
                discounts.len()
            )));
        }
        if let Some(g) = discounts.iter().find(|&&g| !(g >= T::zero() && g < T::one())) {
            return Err(Error::InvalidGame(format!("discount {g} outside [0, 1)")));
        }
        if let Some(bad) = payoffs.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGame(format!("non-finite payoff {bad}")));
        }
        let tol = T::simplex_tol();
        for (r, row) in transition.chunks(num_states).enumerate() {
            if row.iter().any(|&p| !p.is_finite() || p < T::zero()) {
                return Err(Error::InvalidGame(format!(
                    "transition row {} (state {}, joint action {}) has a negative or non-finite entry",
                    r,
                    r / num_joint,
                    r % num_joint
                )));
            }
            let sum: T = row.iter().copied().sum();
            if (sum - T::one()).abs() > tol {
                return Err(Error::InvalidGame(format!(
                    "transition row for state {}, joint action {} sums to {sum}",
                    r / num_joint,
                    r % num_joint
                )));
            }
        }
        Ok(Self {
            action_counts,
            num_states,
            num_joint,
            transition,
            payoffs,
            discounts,
        })
    }

    /// Skips validation; for kernels built from an already valid game.
    pub(crate) fn from_parts(
        action_counts: Vec<usize>,
        num_states: usize,
        transition: Vec<T>,
        payoffs: Vec<T>,
        discounts: Vec<T>,
    ) -> Self {
        let num_joint = action_counts.iter().product();
        Self {
            action_counts,
            num_states,
            num_joint,
            transition,
            payoffs,
            discounts,
        }
    }

    /// One state whose only transition is back to itself.
    pub fn from_normal_form(game: &NormalFormGame<T>, discounts: Vec<T>) -> Result<Self> {
        let n = game.num_players();
        let j_n = game.num_joint_actions();
        let mut payoffs = Vec::with_capacity(j_n * n);
        for j in 0..j_n {
            payoffs.extend((0..n).map(|i| game.player_payoffs(i)[j]));
        }
        Self::new(
            game.action_counts().to_vec(),
            1,
            vec![T::one(); j_n],
            payoffs,
            discounts,
        )
    }

    /// The stage game played in state `x`.
    pub fn stage_game(&self, x: usize) -> NormalFormGame<T> {
        let n = self.num_players();
        let mut payoffs = Vec::with_capacity(self.num_joint * n);
        for i in 0..n {
            payoffs.extend((0..self.num_joint).map(|j| self.payoff(x, j, i)));
        }
        NormalFormGame::new(self.action_counts.clone(), payoffs).expect("stage game inherits a valid shape")
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn num_joint_actions(&self) -> usize {
        self.num_joint
    }

    pub fn discounts(&self) -> &[T] {
        &self.discounts
    }

    pub fn discount(&self, player: usize) -> T {
        self.discounts[player]
    }

    pub fn transition_row(&self, x: usize, joint: usize) -> &[T] {
        let start = (x * self.num_joint + joint) * self.num_states;
        &self.transition[start..start + self.num_states]
    }

    pub fn transition(&self) -> &[T] {
        &self.transition
    }

    pub fn payoff_vector(&self, x: usize, joint: usize) -> &[T] {
        let n = self.num_players();
        let start = (x * self.num_joint + joint) * n;
        &self.payoffs[start..start + n]
    }

    pub fn payoff(&self, x: usize, joint: usize, player: usize) -> T {
        self.payoffs[(x * self.num_joint + joint) * self.num_players() + player]
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

    /// `M = max |g_i(x, s)|` over players, states and joint actions.
    pub fn max_abs_payoff(&self) -> T {
        crate::max_abs(&self.payoffs)
    }

    pub(crate) fn for_each_joint(&self, mut f: impl FnMut(usize, &[usize])) {
        let mut actions = vec![0usize; self.num_players()];
        for j in 0..self.num_joint {
            f(j, &actions);
            advance(&mut actions, &self.action_counts);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> StochasticGame<f64> {
        // one player, two actions, two states; action 0 stays, action 1 swaps
        StochasticGame::new(
            vec![2],
            2,
            vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0, 2.0],
            vec![0.5],
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip() {
        let g = tiny();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(
            s,
            r#"{"players":1,"states":2,"actions":[2],"transition":[[[1.0,0.0],[0.0,1.0]],[[0.0,1.0],[1.0,0.0]]],"payoffs":[[[1.0],[0.0]],[[0.0],[2.0]]],"discounts":[0.5]}"#
        );
        let back: StochasticGame<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rejects_bad_rows_and_discounts() {
        let bad_row = StochasticGame::new(vec![1], 2, vec![0.5, 0.4, 0.0, 1.0], vec![0.0, 0.0], vec![0.5]);
        assert!(matches!(bad_row, Err(Error::InvalidGame(_))));
        let negative = StochasticGame::new(vec![1], 2, vec![1.5, -0.5, 0.0, 1.0], vec![0.0, 0.0], vec![0.5]);
        assert!(negative.is_err());
        for d in [1.0, -0.1, f64::NAN] {
            assert!(StochasticGame::new(vec![1], 1, vec![1.0], vec![0.0], vec![d]).is_err());
        }
        let json = r#"{"players":1,"states":1,"actions":[1],"transition":[[[1.0]]],"payoffs":[[[0.0]]],"discounts":[0.5],"extra":1}"#;
        assert!(serde_json::from_str::<StochasticGame<f64>>(json).is_err());
    }

    #[test]
    fn normal_form_embedding() {
        let nf =
            NormalFormGame::bimatrix(&[vec![1.0, 2.0], vec![3.0, 4.0]], &[vec![5.0, 6.0], vec![7.0, 8.0]]).unwrap();
        let g = StochasticGame::from_normal_form(&nf, vec![0.0, 0.3]).unwrap();
        assert_eq!(g.num_states(), 1);
        assert_eq!(g.stage_game(0), nf);
        assert_eq!(g.payoff(0, g.joint_index(&[1, 0]), 1), 7.0);
    }
}
