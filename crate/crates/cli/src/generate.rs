//! Seeded instance generators and the named games.
//!
//! Every generator draws from `substream(seed, &[tag])` with its own tag, so
//! the same `(kind, params, seed)` always yields the same instance.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use satpath_core::markov::{KStepGame, StochasticGame};
use satpath_core::rng::{substream, Rng};
use satpath_core::simplex::random_point;
use satpath_core::{NormalFormGame, NormalFormGame64, StochasticGame64};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

pub const TAG_NORMAL: u64 = 0x4E46;
pub const TAG_STOCHASTIC: u64 = 0x5354;
pub const TAG_SHAPE: u64 = 0x5348;
pub const TAG_START: u64 = 0x5354_4152;

/// Payoffs are rounded to this grid so they print exactly.
const PAYOFF_QUANTUM: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum NamedGame {
    MatchingPennies,
    RockPaperScissors,
    AllZero,
}

impl fmt::Display for NamedGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NamedGame::MatchingPennies => "matching_pennies",
            NamedGame::RockPaperScissors => "rock_paper_scissors",
            NamedGame::AllZero => "all_zero",
        })
    }
}

impl FromStr for NamedGame {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "matching_pennies" => Ok(NamedGame::MatchingPennies),
            "rock_paper_scissors" => Ok(NamedGame::RockPaperScissors),
            "all_zero" => Ok(NamedGame::AllZero),
            other => Err(HarnessError::Config(format!("unknown named game {other:?}"))),
        }
    }
}

/// `all_zero` takes its shape from `actions` (default 2×2); the other named
/// games have fixed shapes.
pub fn named_game(name: NamedGame, actions: Option<&[usize]>) -> Result<NormalFormGame64, HarnessError> {
    let game = match name {
        NamedGame::MatchingPennies => {
            NormalFormGame::bimatrix(&[vec![1.0, -1.0], vec![-1.0, 1.0]], &[vec![-1.0, 1.0], vec![1.0, -1.0]])?
        }
        NamedGame::RockPaperScissors => {
            let row = vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]];
            let col: Vec<Vec<f64>> = row.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
            NormalFormGame::bimatrix(&row, &col)?
        }
        NamedGame::AllZero => {
            let counts = actions.map_or_else(|| vec![2, 2], <[usize]>::to_vec);
            NormalFormGame::from_fn(counts, |_, _| 0.0)?
        }
    };
    Ok(game)
}

fn quantized_payoff(rng: &mut Rng) -> f64 {
    let u: f64 = rng.random_range(-1.0..=1.0);
    (u / PAYOFF_QUANTUM).round() * PAYOFF_QUANTUM
}

/// Distribution rounded to the payoff grid, with the largest entry absorbing
/// the rounding so the row sums to one.
fn quantized_row(dim: usize, rng: &mut Rng) -> Vec<f64> {
    let mut row: Vec<f64> = random_point::<f64, _>(dim, rng)
        .into_iter()
        .map(|p| (p / PAYOFF_QUANTUM).round() * PAYOFF_QUANTUM)
        .collect();
    let big = (0..dim).fold(0, |b, k| if row[k] > row[b] { k } else { b });
    let rest: f64 = (0..dim).filter(|&k| k != big).map(|k| row[k]).sum();
    row[big] = 1.0 - rest;
    row
}

/// Payoffs i.i.d. uniform on [-1, 1], rounded to 1e-6.
pub fn random_normal_form(actions: &[usize], seed: u64) -> Result<NormalFormGame64, HarnessError> {
    let mut rng = substream(seed, &[TAG_NORMAL]);
    let n = actions.len();
    let joint = actions
        .iter()
        .try_fold(1usize, |a, &m| a.checked_mul(m))
        .unwrap_or(usize::MAX);
    if joint.saturating_mul(n) > satpath_core::MAX_TENSOR_ENTRIES {
        return Err(satpath_core::Error::BudgetExceeded {
            what: "payoff tensor",
            size: joint.saturating_mul(n),
            limit: satpath_core::MAX_TENSOR_ENTRIES,
        }
        .into());
    }
    let payoffs = (0..joint * n).map(|_| quantized_payoff(&mut rng)).collect();
    Ok(NormalFormGame::new(actions.to_vec(), payoffs)?)
}

/// Payoffs as for normal-form games; transition rows are flat-Dirichlet
/// draws rounded to 1e-6. Every player gets discount `gamma`.
pub fn random_stochastic(
    actions: &[usize],
    states: usize,
    gamma: f64,
    seed: u64,
) -> Result<StochasticGame64, HarnessError> {
    let mut rng = substream(seed, &[TAG_STOCHASTIC]);
    let n = actions.len();
    let joint: usize = actions
        .iter()
        .try_fold(1usize, |a, &m| a.checked_mul(m))
        .unwrap_or(usize::MAX);
    let rows = states.saturating_mul(joint);
    if rows.saturating_mul(states) > satpath_core::MAX_TENSOR_ENTRIES {
        return Err(satpath_core::Error::BudgetExceeded {
            what: "transition kernel",
            size: rows.saturating_mul(states),
            limit: satpath_core::MAX_TENSOR_ENTRIES,
        }
        .into());
    }
    let mut transition = Vec::with_capacity(rows * states);
    for _ in 0..rows {
        transition.extend(quantized_row(states, &mut rng));
    }
    let payoffs = (0..rows * n).map(|_| quantized_payoff(&mut rng)).collect();
    Ok(StochasticGame::new(
        actions.to_vec(),
        states,
        transition,
        payoffs,
        vec![gamma; n],
    )?)
}

pub fn random_kstep(
    actions: &[usize],
    states: usize,
    gamma: f64,
    k: usize,
    seed: u64,
) -> Result<KStepGame<f64>, HarnessError> {
    Ok(KStepGame::new(random_stochastic(actions, states, gamma, seed)?, k)?)
}

/// Inclusive range `[lo, hi]` serialized as a two-element array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Span {
    pub lo: usize,
    pub hi: usize,
}

impl From<[usize; 2]> for Span {
    fn from([lo, hi]: [usize; 2]) -> Self {
        Span { lo, hi }
    }
}

impl From<Span> for [usize; 2] {
    fn from(s: Span) -> Self {
        [s.lo, s.hi]
    }
}

impl Span {
    pub fn fixed(v: usize) -> Self {
        Span { lo: v, hi: v }
    }

    pub fn draw(&self, rng: &mut Rng) -> usize {
        if self.lo >= self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }
}

/// Shape of one instance: action counts per player and number of states.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub actions: Vec<usize>,
    pub states: usize,
}

/// Draws a shape for `seed` from inclusive ranges.
pub fn draw_shape(players: Span, actions: Span, states: Span, seed: u64) -> Shape {
    let mut rng = substream(seed, &[TAG_SHAPE]);
    let n = players.draw(&mut rng);
    let actions = (0..n).map(|_| actions.draw(&mut rng)).collect();
    let states = states.draw(&mut rng);
    Shape { actions, states }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_games() {
        let mp = named_game(NamedGame::MatchingPennies, None).unwrap();
        assert_eq!(mp.payoffs(), &[1.0, -1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0]);
        let z = named_game(NamedGame::AllZero, Some(&[3, 2, 2])).unwrap();
        assert_eq!(z.payoffs().len(), 36);
        assert!(z.payoffs().iter().all(|&p| p == 0.0));
        let rps = named_game(NamedGame::RockPaperScissors, None).unwrap();
        assert_eq!(rps.payoff(0, &[1, 0]), 1.0);
        assert_eq!(rps.payoff(1, &[1, 0]), -1.0);
        assert_eq!("all_zero".parse::<NamedGame>().unwrap(), NamedGame::AllZero);
        assert!("chess".parse::<NamedGame>().is_err());
    }

    #[test]
    fn random_games_are_quantized_and_reproducible() {
        let a = random_normal_form(&[2, 3], 5).unwrap();
        let b = random_normal_form(&[2, 3], 5).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        for &p in a.payoffs() {
            assert!((-1.0..=1.0).contains(&p));
            assert!(((p * 1e6).round() - p * 1e6).abs() < 1e-6);
        }
        assert_ne!(a, random_normal_form(&[2, 3], 6).unwrap());
    }

    #[test]
    fn stochastic_rows_are_valid() {
        let g = random_stochastic(&[2, 2], 3, 0.8, 1).unwrap();
        for x in 0..3 {
            for j in 0..4 {
                let row = g.transition_row(x, j);
                assert!(row.iter().all(|&p| p >= 0.0));
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shapes_within_ranges() {
        for seed in 0..50 {
            let s = draw_shape(Span { lo: 2, hi: 3 }, Span { lo: 2, hi: 3 }, Span::fixed(1), seed);
            assert!((2..=3).contains(&s.actions.len()));
            assert!(s.actions.iter().all(|m| (2..=3).contains(m)));
            assert_eq!(s.states, 1);
        }
    }
}
