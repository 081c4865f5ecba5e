//! Desk-scale equilibrium solvers used as the sub-game oracle.
//!
//! Every solver reports the residual of what it returns (largest regret over
//! players) and success is decided by that residual alone, never by the
//! solver's own convergence bookkeeping.

mod argmax;
mod grid;
mod iterative;
pub mod linalg;
mod support;

pub(crate) use argmax::argmax;
pub use argmax::solve_one_player;
pub use grid::{solve_grid, GRID_LATTICE_BUDGET, GRID_STEP};
pub use iterative::{solve_iterative, DAMPING};
pub(crate) use support::{lift, support_profiles};
pub use support::{solve_support_newton, solve_two_player, MAX_SUPPORT_ACTIONS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::NormalFormGame;
use crate::profile::MixedProfile;
use crate::Scalar;

pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Argmax,
    SupportEnum,
    Iterative,
    Grid,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Argmax => "argmax",
            Method::SupportEnum => "support_enum",
            Method::Iterative => "iterative",
            Method::Grid => "grid",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SolverOutcome<T> {
    pub method: Method,
    pub residual: T,
    pub profile: MixedProfile<T>,
}

impl<T: Scalar> SolverOutcome<T> {
    pub(crate) fn evaluate(game: &NormalFormGame<T>, profile: MixedProfile<T>, method: Method) -> Result<Self> {
        let residual = game.residual(&profile)?;
        Ok(Self {
            method,
            residual,
            profile,
        })
    }
}

/// Anything that can return an approximate equilibrium of a finite game.
pub trait EquilibriumSolver<T: Scalar> {
    /// Returns an outcome with `residual ≤ tol` or an error.
    fn solve(&self, game: &NormalFormGame<T>, tol: T) -> Result<SolverOutcome<T>>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    /// Random Newton starts per support profile, on top of the uniform one.
    pub newton_starts: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 16,
            max_iters: 500,
            newton_starts: 2,
        }
    }
}

/// Dispatches on game shape: argmax for one player, support enumeration for
/// two, damped best response (escalating to support search and the grid)
/// otherwise.
#[derive(Clone, Debug, Default)]
pub struct DeskSolver {
    pub settings: SolverSettings,
}

impl DeskSolver {
    pub fn new(settings: SolverSettings) -> Self {
        Self { settings }
    }
}

impl<T: Scalar> EquilibriumSolver<T> for DeskSolver {
    fn solve(&self, game: &NormalFormGame<T>, tol: T) -> Result<SolverOutcome<T>> {
        let s = &self.settings;
        let outcome = match game.num_players() {
            1 => solve_one_player(game)?,
            2 if game.action_counts().iter().all(|&m| m <= MAX_SUPPORT_ACTIONS) => match solve_two_player(game, tol) {
                Ok(o) => o,
                Err(Error::NoEquilibrium { .. }) => solve_grid(game, tol)?,
                Err(e) => return Err(e),
            },
            _ => solve_iterative(game, tol, s.seed, s.restarts, s.max_iters, s.newton_starts)?,
        };
        if outcome.residual <= tol {
            Ok(outcome)
        } else {
            Err(Error::NoEquilibrium {
                method: outcome.method.name(),
                best_residual: outcome.residual.as_f64(),
            })
        }
    }
}
