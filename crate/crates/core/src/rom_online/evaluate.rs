use serde::{Deserialize, Serialize};

use super::{GreedyOptions, GreedyStatus, OnlineSolver};
use crate::contact::{FullOrderModel, HfOptions, HfSolution};
use crate::fem::{h1_error, l2_surface_error};
use crate::rom_offline::{solve_points, ReducedModel};
use crate::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub greedy: GreedyOptions,
    pub hf: HfOptions,
    /// Solve the high-fidelity references one at a time so that their
    /// timings compare with the (always sequential) online timings.
    pub sequential_reference: bool,
}

/// Outcome of one query against its high-fidelity reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub mu: Vec<f64>,
    /// Relative H1 error of the displacement.
    pub primal_error: Option<f64>,
    /// Relative L2 error of the contact pressure on the slave surface.
    pub dual_error: Option<f64>,
    pub iterations: usize,
    pub time: f64,
    pub per_iter_time: f64,
    /// Final active dictionary columns, increasing.
    pub active: Vec<usize>,
    /// Coefficients of `active`.
    pub coefficients: Vec<f64>,
    /// `None` when the online solve itself failed.
    pub status: Option<GreedyStatus>,
    pub hf_time: Option<f64>,
    pub hf_iterations: Option<usize>,
    /// Failure of the online solve or of the reference.
    pub error: Option<String>,
}

impl QueryRecord {
    /// Not converged, failed, or without a reference.
    pub fn flagged(&self) -> bool {
        self.status != Some(GreedyStatus::Converged) || self.error.is_some()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub n_points: usize,
    pub n_converged: usize,
    pub n_flagged: usize,
    pub mean_primal_error: Option<f64>,
    pub mean_dual_error: Option<f64>,
    pub median_active: Option<f64>,
    pub mean_iterations: Option<f64>,
    pub mean_time: Option<f64>,
    pub mean_per_iter_time: Option<f64>,
    pub mean_hf_time: Option<f64>,
    /// `mean_hf_time / mean_time`
    pub speedup: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryReport {
    pub problem_id: String,
    pub dict_size: usize,
    pub rank: usize,
    pub delta: f64,
    pub tau: f64,
    pub sequential_reference: bool,
    pub records: Vec<QueryRecord>,
    pub summary: ReportSummary,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = values.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    (n > 0).then(|| s / n as f64)
}

/// Median of a list; the mean of the two middle values for even lengths.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

impl ReportSummary {
    pub fn from_records(records: &[QueryRecord]) -> Self {
        let solved: Vec<&QueryRecord> = records.iter().filter(|r| r.status.is_some()).collect();
        let mean_time = mean(solved.iter().map(|r| r.time));
        let mean_hf_time = mean(records.iter().filter_map(|r| r.hf_time));
        Self {
            n_points: records.len(),
            n_converged: records.iter().filter(|r| !r.flagged()).count(),
            n_flagged: records.iter().filter(|r| r.flagged()).count(),
            mean_primal_error: mean(records.iter().filter_map(|r| r.primal_error)),
            mean_dual_error: mean(records.iter().filter_map(|r| r.dual_error)),
            median_active: median(&mut solved.iter().map(|r| r.active.len() as f64).collect::<Vec<_>>()),
            mean_iterations: mean(solved.iter().map(|r| r.iterations as f64)),
            mean_time,
            mean_per_iter_time: mean(solved.iter().map(|r| r.per_iter_time)),
            mean_hf_time,
            speedup: mean_hf_time.zip(mean_time).filter(|(_, t)| *t > 0.0).map(|(h, t)| h / t),
        }
    }
}

/// Relative errors of an online solution against a reference.
pub fn query_errors(fom: &FullOrderModel, u: &crate::Vector, lam: &crate::Vector, reference: &HfSolution) -> (Result<f64>, Result<f64>) {
    let mesh = &fom.problem.mesh;
    let slave = fom.problem.contact.slave_surface();
    (h1_error(mesh, u, &reference.u), l2_surface_error(mesh, slave, lam, &reference.lam))
}

/// Run the online solver at every point and compare with freshly computed
/// high-fidelity references. Failures are recorded per point; online
/// queries run one after another so their timings are single-worker.
pub fn evaluate_query_set(
    model: &ReducedModel,
    fom: &FullOrderModel,
    points: &[Vec<f64>],
    opts: &EvalOptions,
) -> Result<QueryReport> {
    let solver = OnlineSolver::new(model, fom)?;
    let references = if opts.sequential_reference {
        points.iter().flat_map(|p| solve_points(fom, std::slice::from_ref(p), &opts.hf)).collect()
    } else {
        solve_points(fom, points, &opts.hf)
    };
    let mut records = Vec::with_capacity(points.len());
    for (mu, reference) in points.iter().zip(references) {
        let mut rec = QueryRecord {
            mu: mu.clone(),
            primal_error: None,
            dual_error: None,
            iterations: 0,
            time: 0.0,
            per_iter_time: 0.0,
            active: Vec::new(),
            coefficients: Vec::new(),
            status: None,
            hf_time: None,
            hf_iterations: None,
            error: None,
        };
        let reference = match reference {
            Ok((sol, t)) => {
                rec.hf_time = Some(t);
                rec.hf_iterations = Some(sol.iterations);
                Some(sol)
            }
            Err(e) => {
                rec.error = Some(format!("reference: {e}"));
                None
            }
        };
        match solver.solve(mu, &opts.greedy) {
            Ok(res) => {
                let mut active = res.state.active.clone();
                active.sort_unstable();
                rec.coefficients = active.iter().map(|&j| res.state.lam_hat[j]).collect();
                rec.active = active;
                rec.iterations = res.iterations();
                rec.time = res.wall_time;
                rec.per_iter_time = res.per_iter_time;
                rec.status = Some(res.status);
                if let Some(reference) = &reference {
                    let (p, d) = query_errors(fom, &res.u, &res.lam, reference);
                    rec.primal_error = p.ok();
                    rec.dual_error = d.ok();
                }
            }
            Err(e) => rec.error = Some(format!("online: {e}")),
        }
        if rec.flagged() {
            log::info!("query {mu:?} flagged: status {:?}, {:?}", rec.status, rec.error);
        }
        records.push(rec);
    }
    Ok(QueryReport {
        problem_id: model.problem_id.clone(),
        dict_size: model.dict_size(),
        rank: model.rank(),
        delta: model.delta,
        tau: opts.greedy.tau.unwrap_or(model.tau),
        sequential_reference: opts.sequential_reference,
        summary: ReportSummary::from_records(&records),
        records,
    })
}
