use super::legality::spec_from_satisfied;
use super::SatisficingGame;
use crate::error::{Error, Result};
use crate::game::{advance, NormalFormGame};
use crate::partition::SatisficingConfig;
use crate::profile::MixedProfile;
use crate::rng::{substream, Rng};
use crate::simplex::{jitter, lattice, lattice_size, random_lattice_point, random_point, subdivisions};
use crate::Scalar;

const JITTER_WEIGHTS: [f64; 2] = [1e-2, 1e-4];

/// Draws up to `budget` tuples of simplex points, one point per entry of
/// `dims`.
///
/// If the product lattice with `k` subdivisions fits in the budget it is
/// enumerated in full; otherwise `budget / 2` lattice points are drawn at
/// random. Half of the remaining budget goes to small jitters of those
/// lattice points (which reach interior points near faces), the rest to
/// uniform random points.
pub fn sample_blocks<T: Scalar>(dims: &[usize], k: usize, budget: usize, rng: &mut Rng) -> Result<Vec<Vec<Vec<T>>>> {
    if budget == 0 {
        return Err(Error::InvalidArgument("sample budget must be positive".into()));
    }
    if dims.is_empty() {
        return Ok(vec![Vec::new()]);
    }
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(lattice_size(d, k)));
    let mut out: Vec<Vec<Vec<T>>> = Vec::with_capacity(budget);
    match total {
        Some(total) if total <= budget => {
            let per_block: Vec<Vec<Vec<T>>> = dims.iter().map(|&d| lattice(d, k)).collect();
            let sizes: Vec<usize> = per_block.iter().map(Vec::len).collect();
            let mut idx = vec![0usize; dims.len()];
            for _ in 0..total {
                out.push(idx.iter().zip(&per_block).map(|(&j, pts)| pts[j].clone()).collect());
                advance(&mut idx, &sizes);
            }
        }
        _ => {
            for _ in 0..budget / 2 {
                out.push(dims.iter().map(|&d| random_lattice_point(d, k, rng)).collect());
            }
        }
    }
    let lattice_count = out.len();
    let jitter_quota = (budget - lattice_count) / 2;
    'jitter: for w in JITTER_WEIGHTS {
        for j in 0..lattice_count {
            if out.len() - lattice_count >= jitter_quota {
                break 'jitter;
            }
            let jittered = out[j].iter().map(|p| jitter(p, w, rng)).collect();
            out.push(jittered);
        }
    }
    while out.len() < budget {
        out.push(dims.iter().map(|&d| random_point(d, rng)).collect());
    }
    Ok(out)
}

/// Admissible successors of `s`: frozen players keep their strategies, free
/// players take sampled points. With no free player the only successor is `s`.
pub fn sample_successors_with<T: Scalar, G: SatisficingGame<T>>(
    game: &G,
    s: &G::Profile,
    config: &SatisficingConfig<T>,
    grid_step: f64,
    budget: usize,
    seed: u64,
) -> Result<Vec<G::Profile>> {
    let satisfied = game.satisfied_groups(s, config)?;
    successors_given(
        game,
        s,
        &satisfied,
        config,
        grid_step,
        budget,
        &mut substream(seed, &[]),
    )
}

pub(crate) fn successors_given<T: Scalar, G: SatisficingGame<T>>(
    game: &G,
    s: &G::Profile,
    satisfied: &[usize],
    config: &SatisficingConfig<T>,
    grid_step: f64,
    budget: usize,
    rng: &mut Rng,
) -> Result<Vec<G::Profile>> {
    let k = subdivisions(grid_step)?;
    if budget == 0 {
        return Err(Error::InvalidArgument("sample budget must be positive".into()));
    }
    let free = spec_from_satisfied(game.num_players(), satisfied, config).free_players;
    if free.is_empty() {
        return Ok(vec![s.clone()]);
    }
    let shapes: Vec<Vec<usize>> = free.iter().map(|&i| game.strategy_blocks(i)).collect();
    let dims: Vec<usize> = shapes.iter().flatten().copied().collect();
    let samples = sample_blocks::<T>(&dims, k, budget, rng)?;
    Ok(samples
        .into_iter()
        .map(|mut blocks| {
            let mut p = s.clone();
            for (&i, shape) in free.iter().zip(&shapes) {
                let rest = blocks.split_off(shape.len());
                p = game.with_strategy(&p, i, blocks);
                blocks = rest;
            }
            p
        })
        .collect())
}

pub fn sample_successors<T: Scalar>(
    game: &NormalFormGame<T>,
    s: &MixedProfile<T>,
    config: &SatisficingConfig<T>,
    grid_step: f64,
    budget: usize,
    seed: u64,
) -> Result<Vec<MixedProfile<T>>> {
    game.check_profile(s)?;
    sample_successors_with(game, s, config, grid_step, budget, seed)
}
