//! Dense linear-algebra substrate.
//!
//! Matrices are `nalgebra` column-major dense matrices. Everything here is a
//! pure function of its inputs.

mod cholesky;
mod nnls;
mod saddle;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub use cholesky::ProfileCholesky;
pub use nnls::{nnls, nonneg_qp};
pub use saddle::solve_saddle;

pub type DenseMatrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative cutoff below which a Gram-Schmidt direction counts as null.
pub const ORTH_DROP_TOL: f64 = 1e-12;

/// Left singular vectors kept by an energy criterion.
#[derive(Clone, Debug)]
pub struct TruncatedBasis {
    /// Orthonormal columns, ordered by decreasing singular value.
    pub vectors: DenseMatrix,
    /// Singular values of the kept vectors (nonincreasing).
    pub singular_values: Vec<f64>,
    /// Full singular spectrum of the input, nonincreasing.
    pub spectrum: Vec<f64>,
    pub delta: f64,
}

impl TruncatedBasis {
    pub fn rank(&self) -> usize {
        self.vectors.ncols()
    }

    /// Fraction of the total squared-singular-value energy that is kept.
    pub fn kept_energy(&self) -> f64 {
        let total: f64 = self.spectrum.iter().map(|s| s * s).sum();
        let kept: f64 = self.singular_values.iter().map(|s| s * s).sum();
        kept / total
    }
}

/// Smallest rank `r` with `sum_{i<=r} s_i^2 >= (1 - delta) * sum_i s_i^2`.
pub fn energy_rank(spectrum: &[f64], delta: f64) -> usize {
    let total: f64 = spectrum.iter().map(|s| s * s).sum();
    let target = (1.0 - delta) * total;
    let mut acc = 0.0;
    for (i, s) in spectrum.iter().enumerate() {
        acc += s * s;
        if acc >= target {
            return i + 1;
        }
    }
    spectrum.len()
}

/// Truncated SVD of `a` keeping a `1 - delta` fraction of the energy.
pub fn truncated_svd(a: &DenseMatrix, delta: f64) -> Result<TruncatedBasis> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    if a.is_empty() || a.iter().all(|&v| v == 0.0) {
        return Err(Error::EmptyBasis);
    }
    let (u, spectrum) = sorted_left_svd(a);
    let rank = energy_rank(&spectrum, delta);
    Ok(TruncatedBasis {
        vectors: u.columns(0, rank).into_owned(),
        singular_values: spectrum[..rank].to_vec(),
        spectrum,
        delta,
    })
}

/// Thin SVD returning left singular vectors and singular values sorted in
/// decreasing order.
pub(crate) fn sorted_left_svd(a: &DenseMatrix) -> (DenseMatrix, Vec<f64>) {
    let svd = a.clone().svd_unordered(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    // stable sort keeps ties in the order nalgebra produced them
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let spectrum = order.iter().map(|&i| svd.singular_values[i]).collect();
    (u.select_columns(order.iter()), spectrum)
}

/// Orthonormal basis of the numerically significant column space of `a`.
///
/// Modified Gram-Schmidt with one reorthogonalisation pass; columns whose
/// remaining norm falls under `ORTH_DROP_TOL` times the largest input column
/// norm are dropped.
pub fn orthonormalize(a: &DenseMatrix) -> Result<DenseMatrix> {
    let reference = a.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    if reference == 0.0 || !reference.is_finite() {
        return Err(Error::ZeroMatrix);
    }
    let mut basis: Vec<Vector> = Vec::with_capacity(a.ncols());
    for col in a.column_iter() {
        let mut v: Vector = col.into_owned();
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dot(&v);
                v.axpy(-proj, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm > ORTH_DROP_TOL * reference {
            basis.push(v / norm);
        }
    }
    if basis.is_empty() {
        return Err(Error::ZeroMatrix);
    }
    Ok(DenseMatrix::from_columns(&basis))
}

/// Minimum-norm least-squares solution `a^+ b` through an SVD, ignoring
/// singular values below `rel_cutoff * s_max`.
pub fn pinv_solve(a: &DenseMatrix, b: &Vector, rel_cutoff: f64) -> Vector {
    let mut x = Vector::zeros(a.ncols());
    if a.is_empty() {
        return x;
    }
    let svd = a.clone().svd_unordered(true, true);
    let u = svd.u.as_ref().unwrap();
    let v_t = svd.v_t.as_ref().unwrap();
    let s_max = svd.singular_values.max();
    if s_max == 0.0 {
        return x;
    }
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > rel_cutoff * s_max {
            let coef = u.column(i).dot(b) / s;
            x.axpy(coef, &v_t.row(i).transpose(), 1.0);
        }
    }
    x
}

/// Least squares for a full-column-rank `a` through Householder QR.
pub fn lstsq(a: &DenseMatrix, b: &Vector) -> Result<Vector> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!("lstsq: {m} rows, rhs of {}", b.len())));
    }
    if n == 0 {
        return Ok(Vector::zeros(0));
    }
    if m < n {
        return Err(Error::Singular);
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let qtb = qr.q().tr_mul(b);
    let scale = r.diagonal().amax();
    if scale == 0.0 || r.diagonal().iter().any(|d| d.abs() <= 1e-14 * scale) {
        return Err(Error::Singular);
    }
    r.solve_upper_triangular(&qtb).ok_or(Error::Singular)
}

/// Columns of `a` picked by `idx`, in that order.
pub fn select_columns(a: &DenseMatrix, idx: &[usize]) -> DenseMatrix {
    a.select_columns(idx.iter())
}
