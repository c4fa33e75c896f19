use std::time::Instant;

use rayon::prelude::*;

use super::TrainingDesign;
use crate::contact::{FullOrderModel, HfOptions, HfSolution, KktResiduals};
use crate::densela::DenseMatrix;
use crate::{Error, Result};

/// High-fidelity snapshots over a design, one column per point in design
/// order.
#[derive(Clone, Debug)]
pub struct SnapshotSet {
    pub problem_id: String,
    pub design: TrainingDesign,
    /// Displacements on the free (non-Dirichlet) dofs.
    pub u: DenseMatrix,
    /// Contact multipliers on the slave nodes.
    pub lam: DenseMatrix,
    pub solve_times: Vec<f64>,
    pub iterations: Vec<usize>,
    /// Relative KKT residuals of each snapshot.
    pub residuals: Vec<KktResiduals>,
    pub hf_tol: f64,
}

impl SnapshotSet {
    pub fn len(&self) -> usize {
        self.design.len()
    }

    pub fn is_empty(&self) -> bool {
        self.design.is_empty()
    }
}

/// Solve every point in parallel; results keep the input order.
pub fn solve_points(fom: &FullOrderModel, points: &[Vec<f64>], opts: &HfOptions) -> Vec<Result<(HfSolution, f64)>> {
    points
        .par_iter()
        .map(|mu| {
            let start = Instant::now();
            let sol = fom.solve(mu, opts)?;
            Ok((sol, start.elapsed().as_secs_f64()))
        })
        .collect()
}

/// Run the high-fidelity solver at every design point. Any failure aborts
/// with the first failing point in design order.
pub fn generate_snapshots(fom: &FullOrderModel, design: &TrainingDesign, opts: &HfOptions) -> Result<SnapshotSet> {
    if design.is_empty() {
        return Err(Error::InvalidArgument("empty training design".into()));
    }
    let n = design.len();
    let mut u = DenseMatrix::zeros(fom.disc.n_free(), n);
    let mut lam = DenseMatrix::zeros(fom.num_duals(), n);
    let mut solve_times = Vec::with_capacity(n);
    let mut iterations = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for (j, (mu, res)) in design.points.iter().zip(solve_points(fom, &design.points, opts)).enumerate() {
        let (sol, time) = res.map_err(|e| Error::SnapshotFailed { mu: mu.clone(), source: Box::new(e) })?;
        u.set_column(j, &fom.disc.restrict(&sol.u));
        lam.set_column(j, &sol.lam);
        solve_times.push(time);
        iterations.push(sol.iterations);
        residuals.push(sol.residuals);
        log::debug!("snapshot {j} at {mu:?}: {} outer iterations, {time:.3} s", sol.iterations);
    }
    Ok(SnapshotSet {
        problem_id: fom.problem.id.clone(),
        design: design.clone(),
        u,
        lam,
        solve_times,
        iterations,
        residuals,
        hf_tol: opts.tol,
    })
}

/// Column norms, used in manifests.
pub fn column_norms(m: &DenseMatrix) -> Vec<f64> {
    m.column_iter().map(|c| c.norm()).collect()
}
