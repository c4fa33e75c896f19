use super::{SnapshotSet, TrainingDesign};
use crate::densela::{truncated_svd, DenseMatrix, TruncatedBasis, Vector};
use crate::fem::{Coefficient, Discretization};
use crate::{Error, Result};

/// Reduced elastic operators for one affine stiffness term `theta_q(mu) K_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedTerm {
    pub coefficient: Coefficient,
    /// `Phi^T K_q,ff Phi`
    pub stiffness: DenseMatrix,
    /// `Phi^T K_q,fd [d_0 d_1 ...]`: coupling to the imposed displacements,
    /// whose affine parts are the columns (constant part first).
    pub lifting: DenseMatrix,
}

/// Offline product: primal basis, dictionaries and reduced operators.
#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub problem_id: String,
    pub design: TrainingDesign,
    /// Primal basis over the free dofs.
    pub phi: TruncatedBasis,
    /// Dual dictionary: the raw multiplier snapshots.
    pub dual_dict: DenseMatrix,
    /// Primal dictionary: the raw free-dof displacement snapshots.
    pub primal_dict: DenseMatrix,
    pub terms: Vec<ReducedTerm>,
    /// `Phi^T f_f`
    pub load: Vector,
    pub delta: f64,
    /// Permitted projected penetration in the online solver.
    pub tau: f64,
    pub snapshot_times: Vec<f64>,
}

impl ReducedModel {
    pub fn rank(&self) -> usize {
        self.phi.rank()
    }

    pub fn dict_size(&self) -> usize {
        self.dual_dict.ncols()
    }

    pub fn num_params(&self) -> usize {
        self.design.bounds.len()
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    fn thetas(&self, mu: &[f64]) -> Vec<f64> {
        self.terms.iter().map(|t| t.coefficient.eval(mu)).collect()
    }

    /// `Phi^T K_ff(mu) Phi`
    pub fn kr(&self, mu: &[f64]) -> DenseMatrix {
        let r = self.rank();
        let mut k = DenseMatrix::zeros(r, r);
        for (t, theta) in self.terms.iter().zip(self.thetas(mu)) {
            k += &t.stiffness * theta;
        }
        k
    }

    /// `Phi^T (f_f - K_fd(mu) u_d(mu))`
    pub fn fr(&self, mu: &[f64]) -> Vector {
        let affine = Vector::from_iterator(mu.len() + 1, std::iter::once(1.0).chain(mu.iter().copied()));
        let mut f = self.load.clone();
        for (t, theta) in self.terms.iter().zip(self.thetas(mu)) {
            f -= &t.lifting * &affine * theta;
        }
        f
    }
}

/// Full-size matrix with `block` placed in rows `rows`.
fn scatter_rows(n: usize, rows: &[usize], block: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(n, block.ncols());
    for (i, &r) in rows.iter().enumerate() {
        out.row_mut(r).copy_from(&block.row(i));
    }
    out
}

/// Truncate the displacement snapshots to `delta` of their energy, keep the
/// multiplier snapshots as the dual dictionary and precompute the reduced
/// operators. `tau` defaults to `delta`.
pub fn build_reduced_model(snaps: &SnapshotSet, disc: &Discretization, delta: f64) -> Result<ReducedModel> {
    if snaps.is_empty() {
        return Err(Error::InvalidArgument("no snapshots".into()));
    }
    if snaps.u.nrows() != disc.n_free() {
        return Err(Error::DimensionMismatch(format!(
            "snapshots have {} rows, problem has {} free dofs",
            snaps.u.nrows(),
            disc.n_free()
        )));
    }
    let phi = truncated_svd(&snaps.u, delta)?;
    let n_params = snaps.design.bounds.len();
    let phi_full = scatter_rows(disc.n_dofs, &disc.free, &phi.vectors);
    let dirichlet = scatter_rows(disc.n_dofs, &disc.fixed, &disc.dirichlet_affine(n_params));
    let terms = disc
        .terms
        .iter()
        .map(|t| {
            let kp = &t.matrix * &phi_full;
            let kp_free = DenseMatrix::from_fn(disc.n_free(), kp.ncols(), |i, j| kp[(disc.free[i], j)]);
            let k = phi.vectors.tr_mul(&kp_free);
            let kd = &t.matrix * &dirichlet;
            let kd_free = DenseMatrix::from_fn(disc.n_free(), kd.ncols(), |i, j| kd[(disc.free[i], j)]);
            ReducedTerm {
                coefficient: t.coefficient,
                stiffness: (&k + k.transpose()) * 0.5,
                lifting: phi.vectors.tr_mul(&kd_free),
            }
        })
        .collect();
    Ok(ReducedModel {
        problem_id: snaps.problem_id.clone(),
        design: snaps.design.clone(),
        load: phi.vectors.tr_mul(&disc.restrict(disc.load())),
        phi,
        dual_dict: snaps.lam.clone(),
        primal_dict: snaps.u.clone(),
        terms,
        delta,
        tau: delta,
        snapshot_times: snaps.solve_times.clone(),
    })
}
