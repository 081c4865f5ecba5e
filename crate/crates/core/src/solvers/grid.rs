use super::{Method, SolverOutcome};
use crate::error::{Error, Result};
use crate::game::{advance, NormalFormGame};
use crate::profile::MixedProfile;
use crate::simplex::{lattice, lattice_size, subdivisions};
use crate::Scalar;

pub const GRID_STEP: f64 = 0.05;

/// Joint lattice points scanned per pass.
pub const GRID_LATTICE_BUDGET: usize = 10_000_000;

const REFINEMENT_PASSES: usize = 2;

/// Scans the product of per-player lattices, keeping the first point with the
/// smallest residual.
fn scan<T: Scalar>(
    game: &NormalFormGame<T>,
    per_player: &[Vec<Vec<T>>],
    best: &mut Option<(T, Vec<Vec<T>>)>,
) -> Result<()> {
    let dims: Vec<usize> = per_player.iter().map(Vec::len).collect();
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&t| t <= GRID_LATTICE_BUDGET)
        .ok_or(Error::BudgetExceeded {
            what: "grid lattice",
            size: dims.iter().fold(1usize, |a, &d| a.saturating_mul(d)),
            limit: GRID_LATTICE_BUDGET,
        })?;
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..total {
        let dists: Vec<Vec<T>> = idx.iter().zip(per_player).map(|(&k, pts)| pts[k].clone()).collect();
        let profile = MixedProfile::from_normalized(dists);
        let res = game.residual(&profile)?;
        if best.as_ref().is_none_or(|(b, _)| res < *b) {
            *best = Some((res, profile.distributions().to_vec()));
        }
        advance(&mut idx, &dims);
    }
    Ok(())
}

/// Lattice points at `k` subdivisions whose integer counts lie within
/// `radius` of `center` (given in the same units).
fn neighbourhood<T: Scalar>(center: &[usize], radius: usize, k: usize) -> Vec<Vec<T>> {
    fn rec(center: &[usize], radius: usize, pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == center.len() {
            if left + radius >= center[pos] && left <= center[pos] + radius {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        let lo = center[pos].saturating_sub(radius);
        let hi = (center[pos] + radius).min(left);
        for c in lo..=hi {
            cur.push(c);
            rec(center, radius, pos + 1, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(center, radius, 0, k, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|c| c.iter().map(|&x| T::lit(x as f64 / k as f64)).collect())
        .collect()
}

/// Exhaustive scan of the step-0.05 lattice followed by two local passes,
/// each halving the step around the incumbent. Returns the best point seen
/// with its residual, which may exceed `tol`; the caller decides.
pub fn solve_grid<T: Scalar>(game: &NormalFormGame<T>, tol: T) -> Result<SolverOutcome<T>> {
    let k = subdivisions(GRID_STEP)?;
    let counts = game.action_counts();
    let size = counts
        .iter()
        .fold(1usize, |acc, &m| acc.saturating_mul(lattice_size(m, k)));
    if size > GRID_LATTICE_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "grid lattice",
            size,
            limit: GRID_LATTICE_BUDGET,
        });
    }
    let per_player: Vec<Vec<Vec<T>>> = counts.iter().map(|&m| lattice(m, k)).collect();
    let mut best = None;
    scan(game, &per_player, &mut best)?;
    let mut k_cur = k;
    for _ in 0..REFINEMENT_PASSES {
        let (res, dists) = best.clone().expect("lattice is nonempty");
        if res <= tol {
            break;
        }
        let k_next = k_cur * 2;
        let local: Vec<Vec<Vec<T>>> = dists
            .iter()
            .map(|d| {
                let center: Vec<usize> = d
                    .iter()
                    .map(|&p| (p.as_f64() * k_next as f64).round() as usize)
                    .collect();
                neighbourhood(&center, 2, k_next)
            })
            .collect();
        if scan(game, &local, &mut best).is_err() {
            break;
        }
        k_cur = k_next;
    }
    let (_, dists) = best.expect("lattice is nonempty");
    SolverOutcome::evaluate(game, MixedProfile::from_normalized(dists), Method::Grid)
}
