//! Lawson-Hanson style active-set solvers for nonnegativity constraints.

use super::{lstsq, DenseMatrix, Vector};

/// Nonnegative least squares: `argmin_{a >= 0} |D a - x|_2`.
///
/// Lawson-Hanson active set with QR subproblem solves. The result is exactly
/// nonnegative.
pub fn nnls(d: &DenseMatrix, x: &Vector) -> Vector {
    assert_eq!(d.nrows(), x.len(), "nnls: rhs length");
    let scale = d.norm() * x.norm();
    let tol = 1e-14 * scale.max(f64::MIN_POSITIVE);
    active_set(
        d.ncols(),
        tol,
        |alpha| d.tr_mul(&(x - d * alpha)),
        |idx| lstsq(&d.select_columns(idx.iter()), x).ok(),
    )
}

/// Nonnegative quadratic program `argmin_{l >= 0} 1/2 l^T H l - b^T l` for a
/// symmetric positive (semi)definite `H`. At the solution `H l - b >= 0`
/// componentwise with complementarity.
pub fn nonneg_qp(h: &DenseMatrix, b: &Vector) -> Vector {
    assert!(h.is_square() && h.nrows() == b.len(), "nonneg_qp: shape");
    let scale = h.amax().max(b.amax());
    let tol = 1e-14 * scale.max(f64::MIN_POSITIVE) * (h.nrows().max(1) as f64);
    active_set(
        b.len(),
        tol,
        |lam| b - h * lam,
        |idx| {
            let sub = h.select_rows(idx.iter()).select_columns(idx.iter());
            let rhs = b.select_rows(idx.iter());
            match sub.clone().cholesky() {
                Some(chol) => Some(chol.solve(&rhs)),
                None => sub.lu().solve(&rhs),
            }
        },
    )
}

/// Shared Lawson-Hanson skeleton. `neg_gradient` returns the descent
/// direction of the objective; `subsolve` the unconstrained minimiser
/// restricted to the given passive indices.
fn active_set<G, S>(n: usize, tol: f64, neg_gradient: G, subsolve: S) -> Vector
where
    G: Fn(&Vector) -> Vector,
    S: Fn(&[usize]) -> Option<Vector>,
{
    let mut alpha = Vector::zeros(n);
    if n == 0 {
        return alpha;
    }
    let mut passive = vec![false; n];
    let mut blocked = vec![false; n];
    let max_outer = 3 * n + 20;

    for _ in 0..max_outer {
        let w = neg_gradient(&alpha);
        let pick = (0..n)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > tol)
            .fold(None, |best: Option<usize>, j| match best {
                Some(b) if w[b] >= w[j] => Some(b),
                _ => Some(j),
            });
        let Some(j) = pick else { break };
        passive[j] = true;

        let mut first_pass = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let z = match subsolve(&idx) {
                Some(z) if z.iter().all(|v| v.is_finite()) => z,
                _ => {
                    // dependent column: drop it for this sweep
                    passive[j] = false;
                    blocked[j] = true;
                    break;
                }
            };
            if z.iter().all(|&v| v > 0.0) {
                for (k, &i) in idx.iter().enumerate() {
                    alpha[i] = z[k];
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }
            if first_pass {
                let pos = idx.iter().position(|&i| i == j).unwrap();
                if z[pos] <= 0.0 {
                    passive[j] = false;
                    blocked[j] = true;
                    break;
                }
            }
            first_pass = false;
            // step back toward z until the first passive entry hits zero
            let mut t = 1.0;
            let mut hit = None;
            for (k, &i) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let ratio = alpha[i] / (alpha[i] - z[k]);
                    if ratio < t {
                        t = ratio;
                        hit = Some(i);
                    }
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                alpha[i] += t * (z[k] - alpha[i]);
            }
            if let Some(i) = hit {
                alpha[i] = 0.0;
                passive[i] = false;
            }
            for &i in &idx {
                if alpha[i] <= 0.0 {
                    alpha[i] = 0.0;
                    passive[i] = false;
                }
            }
            blocked.iter_mut().for_each(|b| *b = false);
        }
    }
    alpha.iter_mut().for_each(|a| {
        if *a < 0.0 {
            *a = 0.0
        }
    });
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute force over all passive sets: unconstrained LS on each subset,
    /// keep feasible candidates, return the best.
    fn nnls_oracle(d: &DenseMatrix, x: &Vector) -> Vector {
        let n = d.ncols();
        let mut best = Vector::zeros(n);
        let mut best_res = x.norm();
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let sub = d.select_columns(idx.iter());
            let z = sub.clone().svd(true, true).solve(x, 1e-14).unwrap();
            if z.iter().any(|&v| v < 0.0) {
                continue;
            }
            let mut cand = Vector::zeros(n);
            for (k, &i) in idx.iter().enumerate() {
                cand[i] = z[k];
            }
            let res = (x - d * &cand).norm();
            if res < best_res - 1e-15 {
                best_res = res;
                best = cand;
            }
        }
        best
    }

    #[test]
    fn consistent_system_recovers_coefficients() {
        let d = DenseMatrix::from_row_slice(4, 3, &[1.0, 0.2, 0.0, 0.0, 1.0, 0.3, 0.5, 0.0, 1.0, 1.0, 1.0, 1.0]);
        let truth = Vector::from_vec(vec![0.5, 2.0, 1.5]);
        let alpha = nnls(&d, &(&d * &truth));
        assert!((alpha - truth).amax() < 1e-12);
    }

    #[test]
    fn target_outside_cone_gives_zero() {
        let d = DenseMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let x = Vector::from_vec(vec![-1.0, 0.0]);
        assert_eq!(nnls(&d, &x), Vector::zeros(1));
    }

    #[test]
    fn matches_brute_force_on_random_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let d = DenseMatrix::from_fn(5, 3, |_, _| rng.random_range(-1.0..1.0));
            let x = Vector::from_fn(5, |_, _| rng.random_range(-1.0..1.0));
            let alpha = nnls(&d, &x);
            let oracle = nnls_oracle(&d, &x);
            assert!((&alpha - &oracle).amax() < 1e-10, "{alpha} vs {oracle}");
            // KKT
            let grad = d.tr_mul(&(&d * &alpha - &x));
            for i in 0..3 {
                if alpha[i] > 0.0 {
                    assert!(grad[i].abs() < 1e-10);
                } else {
                    assert!(grad[i] >= -1e-10);
                }
            }
        }
    }

    #[test]
    fn qp_satisfies_complementarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let a = DenseMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
            let h = a.tr_mul(&a) + DenseMatrix::identity(6, 6) * 0.1;
            let b = Vector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
            let lam = nonneg_qp(&h, &b);
            let slack = &h * &lam - &b;
            for i in 0..6 {
                assert!(lam[i] >= 0.0);
                assert!(slack[i] >= -1e-12);
                assert!((lam[i] * slack[i]).abs() < 1e-12);
            }
        }
    }
}
