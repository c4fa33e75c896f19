use super::{DenseMatrix, Vector};
use crate::{Error, Result};

/// Cholesky factor of a symmetric positive definite matrix stored by rows
/// over its envelope (skyline). Fill-in stays inside the envelope, so the
/// cost is `O(n b^2)` for a matrix of bandwidth `b`.
#[derive(Clone, Debug)]
pub struct ProfileCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl ProfileCholesky {
    /// Factor the full symmetric matrix `a`.
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("cholesky of a non-square matrix".into()));
        }
        let idx: Vec<usize> = (0..a.nrows()).collect();
        Self::factor_submatrix(a, &idx)
    }

    /// Factor the principal submatrix `a[idx, idx]`.
    pub fn factor_submatrix(a: &DenseMatrix, idx: &[usize]) -> Result<Self> {
        let n = idx.len();
        let mut first = Vec::with_capacity(n);
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for (i, &gi) in idx.iter().enumerate() {
            let f = (0..i).find(|&j| a[(gi, idx[j])] != 0.0).unwrap_or(i);
            first.push(f);
            start.push(start[i] + (i - f + 1));
        }
        let mut values = vec![0.0; start[n]];
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let row_i = &values[start[i] + (lo - fi)..start[i] + (j - fi)];
                let row_j = &values[start[j] + (lo - fj)..start[j] + (j - fj)];
                let dot: f64 = row_i.iter().zip(row_j).map(|(x, y)| x * y).sum();
                let s = a[(idx[i], idx[j])] - dot;
                if j < i {
                    let d = values[start[j + 1] - 1];
                    values[start[i] + (j - fi)] = s / d;
                } else {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: i });
                    }
                    values[start[i] + (i - fi)] = s.sqrt();
                }
            }
        }
        Ok(Self { first, start, values })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Envelope size (number of stored entries).
    pub fn envelope(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &Vector) -> Vector {
        let mut x = b.clone();
        self.solve_in_place(x.as_mut_slice());
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n, "rhs length");
        // L y = b
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let dot: f64 = row[..i - fi].iter().zip(&x[fi..i]).map(|(l, y)| l * y).sum();
            x[i] = (x[i] - dot) / row[i - fi];
        }
        // L^T x = y, column sweep over the row storage
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            x[i] /= row[i - fi];
            let xi = x[i];
            for (k, l) in (fi..i).zip(&row[..i - fi]) {
                x[k] -= l * xi;
            }
        }
    }

    /// `A^{-1} B` column by column.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut x = b.clone();
        for mut col in x.column_iter_mut() {
            self.solve_in_place(col.as_mut_slice());
        }
        x
    }
}
