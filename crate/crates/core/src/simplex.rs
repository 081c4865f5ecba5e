//! Points on probability simplices: lattice enumeration and random draws.

use rand::Rng;

use crate::error::{Error, Result};
use crate::Scalar;

/// Number of lattice subdivisions for a grid step. A step that does not
/// divide 1 is rounded to the nearest `1/k`.
pub fn subdivisions(grid_step: f64) -> Result<usize> {
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grid step must lie in (0, 1], got {grid_step}"
        )));
    }
    Ok(((1.0 / grid_step).round() as usize).max(1))
}

/// Number of points `{c / k : c ∈ ℕ^m, Σc = k}`, saturating at `usize::MAX`.
pub fn lattice_size(dim: usize, k: usize) -> usize {
    if dim == 0 {
        return 0;
    }
    // C(k + dim - 1, dim - 1), computed incrementally
    let mut acc: u128 = 1;
    for j in 1..dim as u128 {
        acc = acc * (k as u128 + j) / j;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// All lattice points of the `dim`-action simplex with `k` subdivisions, in
/// lexicographic order of their integer counts.
pub fn lattice<T: Scalar>(dim: usize, k: usize) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(lattice_size(dim, k));
    let mut counts = vec![0usize; dim];
    fill(&mut counts, 0, k, &mut |c| {
        out.push(counts_to_point(c, k));
    });
    out
}

fn fill(counts: &mut [usize], pos: usize, remaining: usize, emit: &mut impl FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        emit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        fill(counts, pos + 1, remaining - c, emit);
    }
}

fn counts_to_point<T: Scalar>(counts: &[usize], k: usize) -> Vec<T> {
    let denom = T::lit(k as f64);
    counts.iter().map(|&c| T::lit(c as f64) / denom).collect()
}

/// Uniformly random lattice point (stars and bars).
pub fn random_lattice_point<T: Scalar, R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Vec<T> {
    let slots = k + dim - 1;
    // choose dim-1 bar positions among `slots` by partial Fisher-Yates
    let mut pos: Vec<usize> = (0..slots).collect();
    for i in 0..dim - 1 {
        let j = rng.random_range(i..slots);
        pos.swap(i, j);
    }
    let mut bars: Vec<usize> = pos[..dim - 1].to_vec();
    bars.sort_unstable();
    let mut counts = Vec::with_capacity(dim);
    let mut last: isize = -1;
    for &b in &bars {
        counts.push((b as isize - last - 1) as usize);
        last = b as isize;
    }
    counts.push((slots as isize - last - 1) as usize);
    counts_to_point(&counts, k)
}

/// Uniform draw from the simplex (flat Dirichlet).
pub fn random_point<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<T> {
    let raw: Vec<f64> = (0..dim)
        .map(|_| {
            let u: f64 = rng.random();
            -(1.0 - u).ln()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|&r| T::lit(r / total)).collect()
}

/// Moves `point` a fraction `weight` of the way towards a random simplex point.
pub fn jitter<T: Scalar, R: Rng + ?Sized>(point: &[T], weight: f64, rng: &mut R) -> Vec<T> {
    let target: Vec<T> = random_point(point.len(), rng);
    let w = T::lit(weight);
    point
        .iter()
        .zip(&target)
        .map(|(&p, &t)| (T::one() - w) * p + w * t)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn lattice_counts_match_binomial() {
        for dim in 1..5 {
            for k in 1..8 {
                let pts: Vec<Vec<f64>> = lattice(dim, k);
                assert_eq!(pts.len(), lattice_size(dim, k));
                for p in &pts {
                    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
        assert_eq!(lattice_size(3, 20), 231);
    }

    #[test]
    fn two_action_half_step_lattice() {
        let pts: Vec<Vec<f64>> = lattice(2, subdivisions(0.5).unwrap());
        assert_eq!(pts, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
    }

    #[test]
    fn random_lattice_points_are_on_lattice() {
        let mut rng = substream(3, &[]);
        for _ in 0..200 {
            let p: Vec<f64> = random_lattice_point(4, 10, &mut rng);
            assert_eq!(p.len(), 4);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for x in p {
                assert!(((x * 10.0).round() - x * 10.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bad_grid_step_rejected() {
        assert!(subdivisions(0.0).is_err());
        assert!(subdivisions(1.5).is_err());
        assert_eq!(subdivisions(0.1).unwrap(), 10);
    }
}
