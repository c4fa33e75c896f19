use super::{DenseMatrix, Vector};
use crate::{Error, Result};

/// Relative singular-value cutoff for declaring the constraint block
/// row-rank deficient.
pub const DEPENDENCY_TOL: f64 = 1e-12;

/// Solve `[[K, C^T], [C, 0]] [u; l] = [f; g]` by LU with partial pivoting on
/// the full block.
pub fn solve_saddle(kr: &DenseMatrix, cr: &DenseMatrix, fr: &Vector, gr: &Vector) -> Result<(Vector, Vector)> {
    let n = kr.nrows();
    let m = cr.nrows();
    if !kr.is_square() || fr.len() != n || gr.len() != m || (m > 0 && cr.ncols() != n) {
        return Err(Error::DimensionMismatch(format!(
            "saddle: K {:?}, C {:?}, f {}, g {}",
            kr.shape(),
            cr.shape(),
            fr.len(),
            gr.len()
        )));
    }
    if m == 0 {
        let u = kr.clone().lu().solve(fr).ok_or(Error::Singular)?;
        return Ok((u, Vector::zeros(0)));
    }
    if m > n {
        return Err(Error::DependentConstraints);
    }
    let sv = cr.singular_values();
    let smax = sv.max();
    if smax == 0.0 || sv.min() <= DEPENDENCY_TOL * smax {
        return Err(Error::DependentConstraints);
    }

    let mut block = DenseMatrix::zeros(n + m, n + m);
    block.view_mut((0, 0), (n, n)).copy_from(kr);
    block.view_mut((n, 0), (m, n)).copy_from(cr);
    block.view_mut((0, n), (n, m)).copy_from(&cr.transpose());
    let mut rhs = Vector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(fr);
    rhs.rows_mut(n, m).copy_from(gr);
    let sol = block.lu().solve(&rhs).ok_or(Error::Singular)?;
    Ok((sol.rows(0, n).into_owned(), sol.rows(n, m).into_owned()))
}
