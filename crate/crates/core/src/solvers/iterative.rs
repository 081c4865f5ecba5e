use super::argmax::argmax;
use super::grid::solve_grid;
use super::support::solve_support_newton;
use super::{Method, SolverOutcome};
use crate::error::{Error, Result};
use crate::game::NormalFormGame;
use crate::profile::MixedProfile;
use crate::rng::substream;
use crate::simplex::random_point;
use crate::Scalar;

/// Weight moved towards the best-response vertex per iteration.
pub const DAMPING: f64 = 0.5;

fn pure_best_responses<T: Scalar>(game: &NormalFormGame<T>, profile: &MixedProfile<T>) -> Vec<usize> {
    (0..game.num_players())
        .map(|i| argmax(&game.action_values_unchecked(profile, i)))
        .collect()
}

/// Damped simultaneous best response `σ ← (1−α)σ + α·e_BR` from random
/// starts. Each iteration also tries the pure best-response profile itself.
/// The first iterate with residual within `tol` is accepted (lowest restart
/// index first). On failure the search escalates to N-player support
/// enumeration and then to the lattice scan, whose outcome may exceed `tol`.
pub fn solve_iterative<T: Scalar>(
    game: &NormalFormGame<T>,
    tol: T,
    seed: u64,
    restarts: usize,
    max_iters: usize,
    newton_starts: usize,
) -> Result<SolverOutcome<T>> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let counts = game.action_counts().to_vec();
    let alpha = T::lit(DAMPING);
    for r in 0..restarts {
        let mut rng = substream(seed, &[0xB7, r as u64]);
        let mut dists: Vec<Vec<T>> = counts.iter().map(|&m| random_point(m, &mut rng)).collect();
        for _ in 0..max_iters.max(1) {
            let profile = MixedProfile::from_normalized(dists.clone());
            let res = game.residual(&profile)?;
            if res <= tol {
                return Ok(SolverOutcome {
                    method: Method::Iterative,
                    residual: res,
                    profile,
                });
            }
            let br = pure_best_responses(game, &profile);
            let vertex = MixedProfile::pure(&counts, &br)?;
            let vres = game.residual(&vertex)?;
            if vres <= tol {
                return Ok(SolverOutcome {
                    method: Method::Iterative,
                    residual: vres,
                    profile: vertex,
                });
            }
            for (d, &b) in dists.iter_mut().zip(&br) {
                for (a, p) in d.iter_mut().enumerate() {
                    let target = if a == b { T::one() } else { T::zero() };
                    *p = (T::one() - alpha) * *p + alpha * target;
                }
            }
        }
    }
    if counts.iter().all(|&m| m <= super::MAX_SUPPORT_ACTIONS) {
        match solve_support_newton(game, tol, seed, newton_starts) {
            Ok(o) => return Ok(o),
            Err(Error::NoEquilibrium { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    solve_grid(game, tol)
}
