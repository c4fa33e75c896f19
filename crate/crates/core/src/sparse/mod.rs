//! Sparse regression kernels: orthogonal matching pursuit, FOCUSS and its
//! nonnegative variant, and randomized sketching of dictionaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::densela::{lstsq, nnls, orthonormalize, pinv_solve, DenseMatrix, Vector};
use crate::{Error, Result};

/// Relative singular value cutoff of the weighted pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-12;
/// Entries below this fraction of the largest magnitude are set to zero.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;
pub const DEFAULT_FOCUSS_TOL: f64 = 1e-10;
pub const DEFAULT_FOCUSS_MAX_ITER: usize = 500;
/// Growth of `|alpha|` over the starting point that counts as divergence.
const BLOW_UP: f64 = 1e12;

/// Sparse coefficient vector with solver diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseCoeffs {
    pub values: Vector,
    /// Indices of the nonzero entries, increasing (OMP: selection order).
    pub support: Vec<usize>,
    pub iterations: usize,
    /// `|D alpha - x|_2`
    pub residual_norm: f64,
    pub converged: bool,
}

fn nonzero_support(values: &Vector) -> Vec<usize> {
    (0..values.len()).filter(|&i| values[i] != 0.0).collect()
}

/// Orthogonal matching pursuit on the column-normalised dictionary.
///
/// Picks the column most correlated with the residual (lowest index on
/// ties), refits all selected coefficients by least squares and stops once
/// `|r| < eps` or `max_terms` columns are in use. Coefficients are returned
/// for the original, unnormalised columns. Not reaching `eps` is reported
/// through `converged`, not as an error.
pub fn omp(d: &DenseMatrix, x: &Vector, eps: f64, max_terms: usize) -> Result<SparseCoeffs> {
    if d.nrows() != x.len() {
        return Err(Error::DimensionMismatch(format!("omp: dictionary has {} rows, signal {}", d.nrows(), x.len())));
    }
    let norms: Vec<f64> = d.column_iter().map(|c| c.norm()).collect();
    let dn = DenseMatrix::from_fn(d.nrows(), d.ncols(), |i, j| if norms[j] > 0.0 { d[(i, j)] / norms[j] } else { 0.0 });
    let mut support: Vec<usize> = Vec::new();
    let mut coef = Vector::zeros(0);
    let mut r = x.clone();
    let mut iterations = 0;
    while r.norm() >= eps && r.norm() > 0.0 && support.len() < max_terms.min(d.ncols()) {
        let corr = dn.tr_mul(&r);
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in corr.iter().enumerate() {
            if norms[j] > 0.0 && !support.contains(&j) && best.is_none_or(|(_, b)| c.abs() > b) {
                best = Some((j, c.abs()));
            }
        }
        let Some((j, c)) = best else { break };
        if c == 0.0 {
            break;
        }
        support.push(j);
        let sub = dn.select_columns(support.iter());
        match lstsq(&sub, x) {
            Ok(c) => {
                coef = c;
                r = x - &sub * &coef;
                iterations += 1;
            }
            Err(_) => {
                // the new column is dependent on the selected ones
                support.pop();
                break;
            }
        }
    }
    let mut values = Vector::zeros(d.ncols());
    for (k, &j) in support.iter().enumerate() {
        values[j] = coef[k] / norms[j];
    }
    let residual_norm = r.norm();
    Ok(SparseCoeffs { values, support, iterations, residual_norm, converged: residual_norm < eps || residual_norm == 0.0 })
}

/// Minimum-norm least-squares solution `D^+ x`, the usual FOCUSS start.
pub fn min_norm_solution(d: &DenseMatrix, x: &Vector) -> Vector {
    pinv_solve(d, x, PINV_CUTOFF)
}

fn hard_zero(alpha: &mut Vector) {
    let cut = SUPPORT_THRESHOLD * alpha.amax();
    for a in alpha.iter_mut() {
        if a.abs() < cut {
            *a = 0.0;
        }
    }
}

/// One reweighted minimum-norm step `W (D W)^+ x` with `W = diag(alpha)`.
fn focuss_step(d: &DenseMatrix, x: &Vector, alpha: &Vector) -> Vector {
    let mut dw = d.clone();
    for (j, mut col) in dw.column_iter_mut().enumerate() {
        col *= alpha[j];
    }
    let q = pinv_solve(&dw, x, PINV_CUTOFF);
    alpha.component_mul(&q)
}

fn check_blow_up(alpha: &Vector, start: f64) -> Result<()> {
    let n = alpha.norm();
    if !n.is_finite() || n > BLOW_UP * start.max(1.0) {
        return Err(Error::Divergence(format!("FOCUSS iterate norm {n:e}")));
    }
    Ok(())
}

/// FOCUSS from `alpha0`; see [`focuss_observed`].
pub fn focuss(d: &DenseMatrix, x: &Vector, alpha0: &Vector, tol: f64, max_iter: usize) -> Result<SparseCoeffs> {
    focuss_observed(d, x, alpha0, tol, max_iter, |_| {})
}

/// FOCUSS: `alpha_k = W_k (D W_k)^+ x` with `W_k = diag(alpha_{k-1})` until
/// `|alpha_k - alpha_{k-1}| < tol |alpha_k|`. Zero entries stay zero. The
/// observer sees every iterate.
pub fn focuss_observed(
    d: &DenseMatrix,
    x: &Vector,
    alpha0: &Vector,
    tol: f64,
    max_iter: usize,
    mut observe: impl FnMut(&Vector),
) -> Result<SparseCoeffs> {
    if d.nrows() != x.len() || d.ncols() != alpha0.len() {
        return Err(Error::DimensionMismatch("focuss: dictionary, signal and start disagree".into()));
    }
    let start = alpha0.norm();
    let mut alpha = alpha0.clone();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let mut next = focuss_step(d, x, &alpha);
        hard_zero(&mut next);
        check_blow_up(&next, start)?;
        iterations += 1;
        observe(&next);
        let change = (&next - &alpha).norm();
        alpha = next;
        if change <= tol * alpha.norm() {
            converged = true;
            break;
        }
    }
    let residual_norm = (d * &alpha - x).norm();
    Ok(SparseCoeffs { support: nonzero_support(&alpha), values: alpha, iterations, residual_norm, converged })
}

/// Nonnegative FOCUSS; see [`nnfocuss_observed`].
pub fn nnfocuss(d: &DenseMatrix, x: &Vector, tol: f64, max_iter: usize) -> Result<SparseCoeffs> {
    nnfocuss_observed(d, x, tol, max_iter, |_| {})
}

/// FOCUSS started from the NNLS solution. Whenever an update would turn an
/// entry negative, the step from the previous iterate is shortened to the
/// largest one keeping every entry nonnegative: with
/// `da = -(alpha_k - alpha_{k-1})^-`, the step length is
/// `min(alpha_{k-1} / da)` over `da > 0`, and the blocking entries become
/// exactly zero. Every iterate is nonnegative.
pub fn nnfocuss_observed(
    d: &DenseMatrix,
    x: &Vector,
    tol: f64,
    max_iter: usize,
    mut observe: impl FnMut(&Vector),
) -> Result<SparseCoeffs> {
    if d.nrows() != x.len() {
        return Err(Error::DimensionMismatch("nnfocuss: dictionary and signal disagree".into()));
    }
    let mut alpha = nnls(d, x);
    observe(&alpha);
    let start = alpha.norm();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let mut next = focuss_step(d, x, &alpha);
        if next.iter().any(|&a| a < 0.0) {
            let step = &next - &alpha;
            let mut t = 1.0f64;
            for i in 0..step.len() {
                if step[i] < 0.0 {
                    t = t.min(alpha[i] / -step[i]);
                }
            }
            next = &alpha + &step * t;
            for i in 0..step.len() {
                if step[i] < 0.0 && alpha[i] / -step[i] <= t {
                    next[i] = 0.0;
                }
            }
        }
        next.apply(|a| *a = a.max(0.0));
        hard_zero(&mut next);
        check_blow_up(&next, start)?;
        iterations += 1;
        observe(&next);
        let change = (&next - &alpha).norm();
        alpha = next;
        if change <= tol * alpha.norm() {
            converged = true;
            break;
        }
    }
    let residual_norm = (d * &alpha - x).norm();
    Ok(SparseCoeffs { support: nonzero_support(&alpha), values: alpha, iterations, residual_norm, converged })
}

/// Orthonormal basis of `D R` for an `n x L` matrix `R` with i.i.d.
/// `U[0, 1)` entries from a ChaCha8 stream seeded by `seed` (filled column
/// by column). If `D R` has rank below `L` the attained rank is returned
/// and a warning logged.
pub fn random_sketch(d: &DenseMatrix, l: usize, seed: u64) -> Result<DenseMatrix> {
    if l == 0 || l > d.ncols() {
        return Err(Error::InvalidArgument(format!("sketch size {l} outside 1..={}", d.ncols())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = DenseMatrix::zeros(d.ncols(), l);
    for v in r.iter_mut() {
        *v = rng.random::<f64>();
    }
    let b = orthonormalize(&(d * r))?;
    if b.ncols() < l {
        log::warn!("sketch of size {l} only reached rank {}", b.ncols());
    }
    Ok(b)
}
