//! Support enumeration: exact linear solves for two players, Newton on the
//! multilinear indifference system for three or more.

use super::linalg::{newton, solve_linear};
use super::{Method, SolverOutcome};
use crate::error::{Error, Result};
use crate::game::NormalFormGame;
use crate::profile::MixedProfile;
use crate::rng::substream;
use crate::Scalar;

/// Per-player action cap for support enumeration.
pub const MAX_SUPPORT_ACTIONS: usize = 8;

/// Support profiles tried by the N-player search before giving up.
const MAX_SUPPORT_PROFILES: usize = 50_000;

/// All `size`-subsets of `0..m` in lexicographic order.
pub(crate) fn combinations(m: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for a in start..=m - left {
            cur.push(a);
            rec(a + 1, m, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size <= m {
        rec(0, m, size, &mut Vec::with_capacity(size), &mut out);
    }
    out
}

/// Support profiles (one subset per player) ordered by total support size,
/// then by the size vector, then lexicographically.
pub(crate) fn support_profiles(counts: &[usize], mut visit: impl FnMut(&[Vec<usize>]) -> bool) {
    let n = counts.len();
    let max_total: usize = counts.iter().sum();
    for total in n..=max_total {
        let mut sizes = vec![1usize; n];
        let mut stop = false;
        size_vectors(counts, total, 0, &mut sizes, &mut |sizes| {
            let lists: Vec<Vec<Vec<usize>>> = sizes.iter().zip(counts).map(|(&s, &m)| combinations(m, s)).collect();
            let mut idx = vec![0usize; n];
            let dims: Vec<usize> = lists.iter().map(Vec::len).collect();
            let combos: usize = dims.iter().product();
            for _ in 0..combos {
                let supports: Vec<Vec<usize>> = (0..n).map(|i| lists[i][idx[i]].clone()).collect();
                if !visit(&supports) {
                    stop = true;
                    return false;
                }
                crate::game::advance(&mut idx, &dims);
            }
            true
        });
        if stop {
            return;
        }
    }
}

fn size_vectors(
    counts: &[usize],
    remaining: usize,
    pos: usize,
    sizes: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    let n = counts.len();
    if pos == n - 1 {
        if remaining >= 1 && remaining <= counts[pos] {
            sizes[pos] = remaining;
            return emit(sizes);
        }
        return true;
    }
    let rest_min = n - pos - 1;
    for s in 1..=counts[pos].min(remaining.saturating_sub(rest_min)) {
        sizes[pos] = s;
        if !size_vectors(counts, remaining - s, pos + 1, sizes, emit) {
            return false;
        }
    }
    true
}

/// Builds a full distribution from values on a support, or `None` when a
/// weight is meaningfully negative.
pub(crate) fn lift<T: Scalar>(support: &[usize], weights: &[T], m: usize) -> Option<Vec<T>> {
    let tol = T::simplex_tol();
    if weights.iter().any(|&w| !(w >= -tol)) {
        return None;
    }
    let mut d = vec![T::zero(); m];
    for (&a, &w) in support.iter().zip(weights) {
        d[a] = w.max(T::zero());
    }
    let total: T = d.iter().copied().sum();
    if !(total > T::zero()) {
        return None;
    }
    d.iter_mut().for_each(|x| *x /= total);
    Some(d)
}

/// Weights on `support` of the player whose mixture makes the opponent
/// indifferent over `opp_support`. `payoff(opp_action, own_action)` is the
/// opponent's payoff.
fn indifference<T: Scalar>(
    support: &[usize],
    opp_support: &[usize],
    payoff: impl Fn(usize, usize) -> T,
) -> Option<Vec<T>> {
    let k = support.len();
    let mut a = Vec::with_capacity(opp_support.len() + 1);
    let mut b = Vec::with_capacity(opp_support.len() + 1);
    for &o in opp_support {
        let mut row: Vec<T> = support.iter().map(|&s| payoff(o, s)).collect();
        row.push(-T::one());
        a.push(row);
        b.push(T::zero());
    }
    let mut sum_row = vec![T::one(); k];
    sum_row.push(T::zero());
    a.push(sum_row);
    b.push(T::one());
    let x = solve_linear(a, b)?;
    Some(x[..k].to_vec())
}

/// Two-player support enumeration. For each support pair, in order of
/// increasing total size, solves the indifference-and-normalization system
/// for both players and returns the first profile whose residual is within
/// `tol`.
pub fn solve_two_player<T: Scalar>(game: &NormalFormGame<T>, tol: T) -> Result<SolverOutcome<T>> {
    if game.num_players() != 2 {
        return Err(Error::InvalidArgument(format!(
            "two-player solver given {} players",
            game.num_players()
        )));
    }
    let (m, k) = (game.action_counts()[0], game.action_counts()[1]);
    if m > MAX_SUPPORT_ACTIONS || k > MAX_SUPPORT_ACTIONS {
        return Err(Error::BudgetExceeded {
            what: "support enumeration actions",
            size: m.max(k),
            limit: MAX_SUPPORT_ACTIONS,
        });
    }
    let row = |a: usize, b: usize| game.payoff(0, &[a, b]);
    let col = |a: usize, b: usize| game.payoff(1, &[a, b]);
    let mut found = None;
    let mut best = T::infinity();
    support_profiles(&[m, k], |s| {
        let (s1, s2) = (&s[0], &s[1]);
        // column weights make the row player indifferent over s1, and vice versa
        let Some(y) = indifference(s2, s1, row) else {
            return true;
        };
        let Some(x) = indifference(s1, s2, |b, a| col(a, b)) else {
            return true;
        };
        let (Some(x), Some(y)) = (lift(s1, &x, m), lift(s2, &y, k)) else {
            return true;
        };
        let profile = MixedProfile::from_normalized(vec![x, y]);
        let Ok(res) = game.residual(&profile) else { return true };
        best = best.min(res);
        if res <= tol {
            found = Some(SolverOutcome {
                method: Method::SupportEnum,
                residual: res,
                profile,
            });
            return false;
        }
        true
    });
    found.ok_or(Error::NoEquilibrium {
        method: "support_enum",
        best_residual: best.as_f64(),
    })
}

/// N-player support search. For each support profile the square system
/// "every supported action earns the player's value, weights sum to one" is
/// solved by Newton from the uniform-on-support point and `starts` random
/// points; roots with nonnegative weights and residual within `tol` are
/// accepted.
pub fn solve_support_newton<T: Scalar>(
    game: &NormalFormGame<T>,
    tol: T,
    seed: u64,
    starts: usize,
) -> Result<SolverOutcome<T>> {
    let counts = game.action_counts().to_vec();
    let n = counts.len();
    let ftol = T::lit(1e-13).max(T::epsilon() * T::lit(64.0));
    let mut found = None;
    let mut best = T::infinity();
    let mut tried = 0usize;
    support_profiles(&counts, |supports| {
        tried += 1;
        if tried > MAX_SUPPORT_PROFILES {
            return false;
        }
        let unpack = |x: &[T]| -> Vec<Vec<T>> {
            let mut off = 0;
            supports
                .iter()
                .zip(&counts)
                .map(|(s, &m)| {
                    let mut d = vec![T::zero(); m];
                    for &a in s {
                        d[a] = x[off];
                        off += 1;
                    }
                    off += 1;
                    d
                })
                .collect()
        };
        let system = |x: &[T]| -> Vec<T> {
            let profile = MixedProfile::from_normalized(unpack(x));
            let mut out = Vec::with_capacity(x.len());
            let mut off = 0;
            for (i, s) in supports.iter().enumerate() {
                let values = game.action_values_unchecked(&profile, i);
                let v = x[off + s.len()];
                out.extend(s.iter().map(|&a| values[a] - v));
                out.push(s.iter().enumerate().map(|(j, _)| x[off + j]).sum::<T>() - T::one());
                off += s.len() + 1;
            }
            out
        };
        let mut rng = substream(seed, &[0x5E, tried as u64]);
        for start in 0..=starts {
            let mut x0 = Vec::new();
            let dists: Vec<Vec<T>> = supports
                .iter()
                .map(|s| {
                    if start == 0 {
                        vec![T::one() / T::lit(s.len() as f64); s.len()]
                    } else {
                        crate::simplex::random_point(s.len(), &mut rng)
                    }
                })
                .collect();
            let mut full = Vec::with_capacity(n);
            for (s, (d, &m)) in supports.iter().zip(dists.iter().zip(&counts)) {
                let mut f = vec![T::zero(); m];
                for (&a, &w) in s.iter().zip(d) {
                    f[a] = w;
                }
                full.push(f);
            }
            let profile = MixedProfile::from_normalized(full);
            for (i, d) in dists.iter().enumerate() {
                let values = game.action_values_unchecked(&profile, i);
                x0.extend(d.iter().copied());
                x0.push(supports[i].iter().zip(d).map(|(&a, &w)| values[a] * w).sum());
            }
            let Some(root) = newton(system, x0, ftol, 40) else {
                continue;
            };
            let dists = unpack(&root);
            let lifted: Option<Vec<Vec<T>>> = dists
                .iter()
                .zip(supports)
                .map(|(d, s)| {
                    let w: Vec<T> = s.iter().map(|&a| d[a]).collect();
                    lift(s, &w, d.len())
                })
                .collect();
            let Some(lifted) = lifted else { continue };
            let profile = MixedProfile::from_normalized(lifted);
            let Ok(res) = game.residual(&profile) else { continue };
            best = best.min(res);
            if res <= tol {
                found = Some(SolverOutcome {
                    method: Method::SupportEnum,
                    residual: res,
                    profile,
                });
                return false;
            }
            if supports.iter().all(|s| s.len() == 1) {
                // pure supports have a unique root
                break;
            }
        }
        true
    });
    found.ok_or(Error::NoEquilibrium {
        method: "support_enum",
        best_residual: best.as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn combinations_in_order() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn support_profiles_by_total_size() {
        let mut seen = Vec::new();
        support_profiles(&[2, 2], |s| {
            seen.push(s.iter().map(Vec::len).sum::<usize>());
            true
        });
        assert_eq!(seen.len(), 9);
        assert!(seen.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn matching_pennies_is_uniform() {
        let o = solve_two_player(&matching_pennies(), 1e-9).unwrap();
        assert!(o.residual <= 1e-9);
        // hand check: each player's mixture equalizes the opponent's two payoffs, so p = 1/2
        for i in 0..2 {
            assert!((o.profile.dist(i)[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rock_paper_scissors_is_uniform_thirds() {
        let o = solve_two_player(&rock_paper_scissors(), 1e-9).unwrap();
        for i in 0..2 {
            for &p in o.profile.dist(i) {
                assert!((p - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dominant_pure_pair_found_first() {
        // action 1 strictly dominant for both
        let g = NormalFormGame::bimatrix(
            &[vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]],
            &[vec![0.0, 1.0, 0.5], vec![0.0, 1.0, 0.5]],
        )
        .unwrap();
        let o = solve_two_player(&g, 1e-9).unwrap();
        assert_eq!(o.profile.dist(0), &[0.0, 1.0]);
        assert_eq!(o.profile.dist(1), &[0.0, 1.0, 0.0]);
        assert_eq!(o.residual, 0.0);
    }

    #[test]
    fn degenerate_all_zero_game() {
        let g = NormalFormGame::new(vec![3, 3], vec![0.0; 18]).unwrap();
        let o = solve_two_player(&g, 0.0).unwrap();
        assert_eq!(o.residual, 0.0);
    }

    #[test]
    fn random_bimatrix_games_solved() {
        for seed in 0..40 {
            let g = seeded(vec![2 + (seed as usize % 3), 2 + (seed as usize / 3 % 3)], seed);
            let o = solve_two_player(&g, 1e-9).unwrap();
            assert!(g.is_eps_equilibrium(&o.profile, 1e-9).unwrap());
        }
    }

    #[test]
    fn three_player_newton_search() {
        for seed in 0..20 {
            let g = seeded(vec![2, 2, 2], 100 + seed);
            let o = solve_support_newton(&g, 1e-9, seed, 2).unwrap();
            assert!(g.is_eps_equilibrium(&o.profile, 1e-9).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn three_player_fully_mixed_instance() {
        // each player wants to mismatch the next one: no pure equilibrium
        let g = NormalFormGame::from_fn(vec![2, 2, 2], |i, a| if a[i] != a[(i + 1) % 3] { 1.0 } else { 0.0 }).unwrap();
        let o = solve_support_newton(&g, 1e-10, 0, 2).unwrap();
        assert!(o.residual <= 1e-10);
    }
}
