use serde::{Deserialize, Serialize};

use super::freeze::freeze_to;
use super::values::{solve_mdp, stationary_residual};
use super::{StationaryPolicyProfile, StochasticGame};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::simplex::{lattice, lattice_size, random_lattice_point, random_point, subdivisions};
use crate::solvers::linalg::{newton, solve_linear};
use crate::solvers::{lift, support_profiles, DeskSolver, EquilibriumSolver, SolverSettings};
use crate::Scalar;

/// Support profiles (one per player and state) tried by the Newton search.
const MAX_MARKOV_SUPPORTS: usize = 4096;

/// Value-evaluation tolerance used when none is given: `1e-9`, or coarser
/// where the scalar type cannot resolve that.
pub fn default_eval_tol<T: Scalar>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(1024.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkovMethod {
    MdpGreedy,
    StageGame,
    DampedBestResponse,
    SupportNewton,
    Grid,
}

impl MarkovMethod {
    pub fn name(self) -> &'static str {
        match self {
            MarkovMethod::MdpGreedy => "mdp_greedy",
            MarkovMethod::StageGame => "stage_game",
            MarkovMethod::DampedBestResponse => "damped_best_response",
            MarkovMethod::SupportNewton => "support_newton",
            MarkovMethod::Grid => "grid",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MarkovOutcome<T> {
    pub method: MarkovMethod,
    /// Largest stationary regret, from values accurate to the solver's
    /// evaluation tolerance.
    pub residual: T,
    pub policy: StationaryPolicyProfile<T>,
}

/// Anything that returns an approximate stationary Markov equilibrium.
pub trait MarkovSolver<T: Scalar> {
    fn solve(&self, game: &StochasticGame<T>, tol: T) -> Result<MarkovOutcome<T>>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarkovSettings {
    pub seed: u64,
    pub restarts: usize,
    /// Policy iterations shared across all restarts.
    pub total_iters: usize,
    pub damping: f64,
    pub newton_starts: usize,
    pub grid_step: f64,
    /// Lattice points scanned by the grid fallback.
    pub grid_budget: usize,
    /// Tolerance of every value evaluation; `None` uses [`default_eval_tol`].
    pub eval_tol: Option<f64>,
    /// Settings for single-state games, which reduce to their stage game.
    pub stage: SolverSettings,
}

impl Default for MarkovSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 16,
            total_iters: 10_000,
            damping: 0.5,
            newton_starts: 1,
            grid_step: 0.1,
            grid_budget: 5_000,
            eval_tol: None,
            stage: SolverSettings::default(),
        }
    }
}

/// Dispatch: an MDP for one player, the stage game for one state, otherwise
/// damped best response in policy space, then a per-state support search
/// with Newton, then a per-state lattice scan.
#[derive(Clone, Debug, Default)]
pub struct MarkovDeskSolver {
    pub settings: MarkovSettings,
}

impl MarkovDeskSolver {
    pub fn new(settings: MarkovSettings) -> Self {
        Self { settings }
    }

    pub fn eval_tol<T: Scalar>(&self) -> T {
        self.settings
            .eval_tol
            .map_or_else(default_eval_tol, |t| T::lit(t).max(default_eval_tol::<T>()))
    }
}

fn outcome<T: Scalar>(
    game: &StochasticGame<T>,
    policy: StationaryPolicyProfile<T>,
    method: MarkovMethod,
    eval_tol: T,
) -> Result<MarkovOutcome<T>> {
    Ok(MarkovOutcome {
        residual: stationary_residual(game, &policy, eval_tol)?,
        method,
        policy,
    })
}

impl<T: Scalar> MarkovSolver<T> for MarkovDeskSolver {
    fn solve(&self, game: &StochasticGame<T>, tol: T) -> Result<MarkovOutcome<T>> {
        let eval_tol = self.eval_tol::<T>();
        let s = &self.settings;
        let result = if game.num_players() == 1 {
            let (_, greedy) = solve_mdp(game, eval_tol);
            let policy = StationaryPolicyProfile::pure(game.action_counts(), &[greedy])?;
            outcome(game, policy, MarkovMethod::MdpGreedy, eval_tol)?
        } else if game.num_states() == 1 {
            let scale = game.discounts().iter().map(|&g| T::one() - g).fold(T::one(), T::min);
            let stage = DeskSolver::new(s.stage.clone()).solve(&game.stage_game(0), tol * scale)?;
            outcome(
                game,
                StationaryPolicyProfile::from_mixed(&stage.profile, 1),
                MarkovMethod::StageGame,
                eval_tol,
            )?
        } else {
            match damped_best_response(game, tol, s, eval_tol)? {
                Some(o) => o,
                None => match support_newton(game, tol, s, eval_tol)? {
                    Some(o) => o,
                    None => lattice_scan(game, s, eval_tol)?,
                },
            }
        };
        if result.residual <= tol + T::lit(2.0) * eval_tol {
            Ok(result)
        } else {
            Err(Error::NoEquilibrium {
                method: result.method.name(),
                best_residual: result.residual.as_f64(),
            })
        }
    }
}

/// Greedy responses of every player against `pi`, with the residual of `pi`.
fn responses<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    eval_tol: T,
) -> Result<(T, Vec<Vec<usize>>)> {
    let mut residual = T::zero();
    let mut greedy = Vec::with_capacity(game.num_players());
    for i in 0..game.num_players() {
        let h = super::evaluate_policy(game, pi, i, eval_tol)?;
        let (best, g) = solve_mdp(&freeze_to(game, pi, &[i]), eval_tol);
        for (b, v) in best.iter().zip(&h) {
            residual = residual.max(*b - *v);
        }
        greedy.push(g);
    }
    Ok((residual, greedy))
}

fn damped_best_response<T: Scalar>(
    game: &StochasticGame<T>,
    tol: T,
    s: &MarkovSettings,
    eval_tol: T,
) -> Result<Option<MarkovOutcome<T>>> {
    if s.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let counts = game.action_counts().to_vec();
    let x_n = game.num_states();
    let alpha = T::lit(s.damping);
    let per_restart = (s.total_iters / s.restarts).max(1);
    for r in 0..s.restarts {
        let mut rng = substream(s.seed, &[0x3A, r as u64]);
        let mut pi = if r == 0 {
            StationaryPolicyProfile::uniform(&counts, x_n)
        } else {
            StationaryPolicyProfile::from_normalized(
                counts
                    .iter()
                    .map(|&m| (0..x_n).map(|_| random_point(m, &mut rng)).collect())
                    .collect(),
            )
        };
        for _ in 0..per_restart {
            let (res, greedy) = responses(game, &pi, eval_tol)?;
            if res <= tol {
                return Ok(Some(outcome(game, pi, MarkovMethod::DampedBestResponse, eval_tol)?));
            }
            let vertex = StationaryPolicyProfile::pure(&counts, &greedy)?;
            let (vres, _) = responses(game, &vertex, eval_tol)?;
            if vres <= tol {
                return Ok(Some(outcome(game, vertex, MarkovMethod::DampedBestResponse, eval_tol)?));
            }
            let policies = pi
                .policies()
                .iter()
                .zip(&greedy)
                .map(|(per_state, g)| {
                    per_state
                        .iter()
                        .zip(g)
                        .map(|(d, &b)| {
                            d.iter()
                                .enumerate()
                                .map(|(a, &p)| (T::one() - alpha) * p + if a == b { alpha } else { T::zero() })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            pi = StationaryPolicyProfile::from_normalized(policies);
        }
    }
    Ok(None)
}

/// Exact values of `pi` for one player from `(I − γ P_π) h = r`.
fn exact_values<T: Scalar>(mdp: &StochasticGame<T>, policy: &[Vec<T>]) -> Option<Vec<T>> {
    let x_n = mdp.num_states();
    let gamma = mdp.discount(0);
    let mut a = vec![vec![T::zero(); x_n]; x_n];
    let mut b = vec![T::zero(); x_n];
    for x in 0..x_n {
        a[x][x] = T::one();
        for (act, &p) in policy[x].iter().enumerate() {
            b[x] += p * mdp.payoff(x, act, 0);
            for (y, &q) in mdp.transition_row(x, act).iter().enumerate() {
                a[x][y] -= gamma * p * q;
            }
        }
    }
    solve_linear(a, b)
}

/// Per-state action values `Q(x, a)` of one player against the others.
fn action_values<T: Scalar>(
    game: &StochasticGame<T>,
    pi: &StationaryPolicyProfile<T>,
    player: usize,
) -> Option<Vec<Vec<T>>> {
    let mdp = freeze_to(game, pi, &[player]);
    let h = exact_values(&mdp, pi.player_policy(player))?;
    let gamma = mdp.discount(0);
    Some(
        (0..mdp.num_states())
            .map(|x| {
                (0..mdp.action_counts()[0])
                    .map(|a| {
                        let next: T = mdp.transition_row(x, a).iter().zip(&h).map(|(&p, &v)| p * v).sum();
                        mdp.payoff(x, a, 0) + gamma * next
                    })
                    .collect()
            })
            .collect(),
    )
}

/// Per-state supports for every player. Unknowns are the supported
/// weights; equations make every supported action's value equal to the
/// first supported action's and the weights sum to one.
fn support_newton<T: Scalar>(
    game: &StochasticGame<T>,
    tol: T,
    s: &MarkovSettings,
    eval_tol: T,
) -> Result<Option<MarkovOutcome<T>>> {
    let n = game.num_players();
    let x_n = game.num_states();
    let counts = game.action_counts().to_vec();
    // block b = (player b / x_n, state b % x_n)
    let block_counts: Vec<usize> = (0..n * x_n).map(|b| counts[b / x_n]).collect();
    let ftol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    let mut found = None;
    let mut tried = 0usize;
    let mut failure = None;
    support_profiles(&block_counts, |supports| {
        tried += 1;
        if tried > MAX_MARKOV_SUPPORTS {
            return false;
        }
        let unpack = |w: &[T]| -> StationaryPolicyProfile<T> {
            let mut off = 0;
            let mut policies = vec![Vec::with_capacity(x_n); n];
            for (b, sup) in supports.iter().enumerate() {
                let mut d = vec![T::zero(); block_counts[b]];
                for &a in sup {
                    d[a] = w[off];
                    off += 1;
                }
                policies[b / x_n].push(d);
            }
            StationaryPolicyProfile::from_normalized(policies)
        };
        let system = |w: &[T]| -> Vec<T> {
            let pi = unpack(w);
            let q: Option<Vec<Vec<Vec<T>>>> = (0..n).map(|i| action_values(game, &pi, i)).collect();
            let Some(q) = q else {
                return vec![T::nan(); w.len()];
            };
            let mut out = Vec::with_capacity(w.len());
            let mut off = 0;
            for (b, sup) in supports.iter().enumerate() {
                let qx = &q[b / x_n][b % x_n];
                out.extend(sup[1..].iter().map(|&a| qx[a] - qx[sup[0]]));
                out.push(w[off..off + sup.len()].iter().copied().sum::<T>() - T::one());
                off += sup.len();
            }
            out
        };
        let mut rng = substream(s.seed, &[0x5F, tried as u64]);
        let pure = supports.iter().all(|sup| sup.len() == 1);
        for start in 0..=s.newton_starts {
            let w0: Vec<T> = supports
                .iter()
                .flat_map(|sup| {
                    if start == 0 {
                        vec![T::one() / T::lit(sup.len() as f64); sup.len()]
                    } else {
                        random_point(sup.len(), &mut rng)
                    }
                })
                .collect();
            let Some(root) = newton(system, w0, ftol, 40) else {
                if pure {
                    break;
                }
                continue;
            };
            let mut off = 0;
            let mut policies = vec![Vec::with_capacity(x_n); n];
            let mut ok = true;
            for (b, sup) in supports.iter().enumerate() {
                match lift(sup, &root[off..off + sup.len()], block_counts[b]) {
                    Some(d) => policies[b / x_n].push(d),
                    None => ok = false,
                }
                off += sup.len();
            }
            if ok {
                let pi = StationaryPolicyProfile::from_normalized(policies);
                match outcome(game, pi, MarkovMethod::SupportNewton, eval_tol) {
                    Ok(o) if o.residual <= tol => {
                        found = Some(o);
                        return false;
                    }
                    Ok(_) => {}
                    Err(e) => {
                        failure = Some(e);
                        return false;
                    }
                }
            }
            if pure {
                break;
            }
        }
        true
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(found),
    }
}

/// Scans the product of per-state lattices (or a seeded sample of it when
/// too large) and returns the point with the smallest residual.
fn lattice_scan<T: Scalar>(game: &StochasticGame<T>, s: &MarkovSettings, eval_tol: T) -> Result<MarkovOutcome<T>> {
    let k = subdivisions(s.grid_step)?;
    if s.grid_budget == 0 {
        return Err(Error::InvalidArgument("grid budget must be positive".into()));
    }
    let n = game.num_players();
    let x_n = game.num_states();
    let counts = game.action_counts();
    let dims: Vec<usize> = (0..n * x_n).map(|b| counts[b / x_n]).collect();
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(lattice_size(d, k)))
        .filter(|&t| t <= s.grid_budget);
    let mut rng = substream(s.seed, &[0x6D]);
    let points: Vec<Vec<Vec<T>>> = match total {
        Some(t) => {
            let per: Vec<Vec<Vec<T>>> = dims.iter().map(|&d| lattice(d, k)).collect();
            let sizes: Vec<usize> = per.iter().map(Vec::len).collect();
            let mut idx = vec![0; dims.len()];
            (0..t)
                .map(|_| {
                    let p = idx.iter().zip(&per).map(|(&j, pts)| pts[j].clone()).collect();
                    crate::game::advance(&mut idx, &sizes);
                    p
                })
                .collect()
        }
        None => (0..s.grid_budget)
            .map(|_| dims.iter().map(|&d| random_lattice_point(d, k, &mut rng)).collect())
            .collect(),
    };
    let mut best: Option<(T, StationaryPolicyProfile<T>)> = None;
    for blocks in points {
        let mut policies = vec![Vec::with_capacity(x_n); n];
        for (b, d) in blocks.into_iter().enumerate() {
            policies[b / x_n].push(d);
        }
        let pi = StationaryPolicyProfile::from_normalized(policies);
        let res = stationary_residual(game, &pi, eval_tol)?;
        if best.as_ref().is_none_or(|(r, _)| res < *r) {
            best = Some((res, pi));
        }
    }
    let (residual, policy) = best.expect("budget is positive");
    Ok(MarkovOutcome {
        method: MarkovMethod::Grid,
        residual,
        policy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::tests::seeded_game;
    use crate::markov::{is_markov_equilibrium, stationary_regrets};
    use crate::NormalFormGame;

    #[test]
    fn one_player_mdp() {
        let g = seeded_game(&[3], 3, 0.9, 2);
        let o = MarkovSolver::<f64>::solve(&MarkovDeskSolver::default(), &g, 1e-6).unwrap();
        assert_eq!(o.method, MarkovMethod::MdpGreedy);
        assert!(o.residual <= 1e-8);
    }

    #[test]
    fn single_state_uses_stage_game() {
        let mp =
            NormalFormGame::bimatrix(&[vec![1.0, -1.0], vec![-1.0, 1.0]], &[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let g = StochasticGame::from_normal_form(&mp, vec![0.5, 0.5]).unwrap();
        let o = MarkovSolver::<f64>::solve(&MarkovDeskSolver::default(), &g, 1e-6).unwrap();
        assert_eq!(o.method, MarkovMethod::StageGame);
        for i in 0..2 {
            assert!((o.policy.dist(i, 0)[0] - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn random_games_solve() {
        let solver = MarkovDeskSolver::default();
        let mut solved = 0;
        for seed in 0..10 {
            let g = seeded_game(&[2, 2], 3, 0.8, 100 + seed);
            if let Ok(o) = solver.solve(&g, 1e-5) {
                assert!(is_markov_equilibrium(&g, &o.policy, 1e-5, 1e-9).unwrap());
                let r = stationary_regrets(&g, &o.policy, 1e-10).unwrap();
                assert!(r.iter().all(|&x| x <= 1e-5 + 1e-8));
                solved += 1;
            }
        }
        assert!(solved >= 9, "solved {solved} of 10");
    }

    #[test]
    fn matching_pennies_in_two_states_needs_mixing() {
        // the same zero-sum stage game in both states, states swap every step
        let mut pay = Vec::new();
        for _x in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let r = if a == b { 1.0 } else { -1.0 };
                    pay.extend([r, -r]);
                }
            }
        }
        let mut trans = Vec::new();
        for x in 0..2 {
            for _j in 0..4 {
                trans.extend(if x == 0 { [0.0, 1.0] } else { [1.0, 0.0] });
            }
        }
        let g = StochasticGame::new(vec![2, 2], 2, trans, pay, vec![0.7, 0.7]).unwrap();
        let o = MarkovSolver::<f64>::solve(&MarkovDeskSolver::default(), &g, 1e-7).unwrap();
        for i in 0..2 {
            for x in 0..2 {
                assert!((o.policy.dist(i, x)[0] - 0.5).abs() < 1e-5);
            }
        }
    }
}
