//! Dense elimination and a finite-difference Newton iteration, sized for the
//! tiny systems that support enumeration produces.

use crate::Scalar;

/// Pivots smaller than this are treated as zero.
pub const SINGULARITY_THRESHOLD: f64 = 1e-10;

/// Solves `a · x = b` for a possibly rectangular system by partial-pivot
/// elimination. Columns without a usable pivot become free variables fixed
/// at zero. Returns `None` when the system is inconsistent.
#[allow(clippy::needless_range_loop)]
pub fn solve_linear<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let eps = T::lit(SINGULARITY_THRESHOLD);
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, mag) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, T::neg_infinity()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= eps {
            continue;
        }
        a.swap(r, best);
        b.swap(r, best);
        for i in 0..rows {
            if i != r && a[i][c] != T::zero() {
                let f = a[i][c] / a[r][c];
                for j in c..cols {
                    let v = a[r][j];
                    a[i][j] -= f * v;
                }
                let v = b[r];
                b[i] -= f * v;
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    let scale = b.iter().fold(T::one(), |m, v| m.max(v.abs()));
    if b[r..].iter().any(|v| v.abs() > eps * scale * T::lit(10.0)) {
        return None;
    }
    let mut x = vec![T::zero(); cols];
    for &(row, c) in &pivots {
        x[c] = b[row] / a[row][c];
    }
    Some(x)
}

/// Newton's method with a forward-difference Jacobian and step halving on
/// the sup-norm of the residual. Returns the root when `‖f(x)‖∞ ≤ ftol`.
pub fn newton<T: Scalar>(f: impl Fn(&[T]) -> Vec<T>, mut x: Vec<T>, ftol: T, max_iters: usize) -> Option<Vec<T>> {
    let n = x.len();
    let norm = |v: &[T]| crate::scalar::max_abs(v);
    let mut fx = f(&x);
    let mut fnorm = norm(&fx);
    let h_base = T::epsilon().sqrt();
    for _ in 0..max_iters {
        if !fnorm.is_finite() {
            return None;
        }
        if fnorm <= ftol {
            return Some(x);
        }
        let mut jac = vec![vec![T::zero(); n]; fx.len()];
        for j in 0..n {
            let h = h_base * x[j].abs().max(T::one());
            let mut xp = x.clone();
            xp[j] += h;
            let fp = f(&xp);
            for (row, (p, q)) in jac.iter_mut().zip(fp.iter().zip(&fx)) {
                row[j] = (*p - *q) / h;
            }
        }
        let rhs: Vec<T> = fx.iter().map(|v| -*v).collect();
        let step = solve_linear(jac, rhs)?;
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..20 {
            let trial: Vec<T> = x.iter().zip(&step).map(|(a, s)| *a + t * *s).collect();
            let ft = f(&trial);
            let tn = norm(&ft);
            if tn.is_finite() && tn < fnorm {
                x = trial;
                fx = ft;
                fnorm = tn;
                accepted = true;
                break;
            }
            t *= T::lit(0.5);
        }
        if !accepted {
            return (fnorm <= ftol).then_some(x);
        }
    }
    (fnorm <= ftol).then_some(x)
}
