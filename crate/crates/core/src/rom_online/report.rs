//! Report files of a query set.
//!
//! * `points.csv`: one row per query (parameters, errors, iterations,
//!   timings, active-set size, status).
//! * `summary.json`: means plus the hashes of the run configuration and of
//!   the model manifest.
//! * `sparsity.txt`: coordinate list `query column coefficient` of the final
//!   active sets.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GreedyStatus, QueryReport, ReportSummary};
use crate::Result;

pub const POINTS_CSV: &str = "points.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SPARSITY_TXT: &str = "sparsity.txt";

/// Columns of `points.csv` holding wall-clock measurements.
pub const TIMING_COLUMNS: [&str; 3] = ["time", "per_iter_time", "hf_time"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub config_hash: String,
    pub model_manifest_hash: String,
    #[serde(flatten)]
    pub report: QueryReport,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub fn points_csv(report: &QueryReport) -> String {
    let n_params = report.records.first().map_or(1, |r| r.mu.len());
    let mut out = String::new();
    for i in 0..n_params {
        let _ = write!(out, "mu_{i},");
    }
    out.push_str("primal_err,dual_err,iters,time,per_iter_time,active_size,status,hf_time\n");
    for r in &report.records {
        for m in &r.mu {
            let _ = write!(out, "{m},");
        }
        let status = match r.status {
            Some(GreedyStatus::Converged) => "converged",
            Some(GreedyStatus::MaxIterations) => "max_iterations",
            Some(GreedyStatus::Oscillation) => "oscillation",
            None => "failed",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            opt(r.primal_error),
            opt(r.dual_error),
            r.iterations,
            r.time,
            r.per_iter_time,
            r.active.len(),
            status,
            opt(r.hf_time)
        );
    }
    out
}

pub fn sparsity_list(report: &QueryReport) -> String {
    let mut out = String::from("# query column coefficient\n");
    for (q, r) in report.records.iter().enumerate() {
        for (j, c) in r.active.iter().zip(&r.coefficients) {
            let _ = writeln!(out, "{q} {j} {c}");
        }
    }
    out
}

pub fn write_report(report: &QueryReport, dir: &Path, config_hash: &str, model_manifest_hash: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(POINTS_CSV), points_csv(report))?;
    fs::write(dir.join(SPARSITY_TXT), sparsity_list(report))?;
    let file = ReportFile {
        config_hash: config_hash.into(),
        model_manifest_hash: model_manifest_hash.into(),
        report: report.clone(),
    };
    fs::write(dir.join(SUMMARY_JSON), serde_json::to_vec_pretty(&file)?)?;
    Ok(())
}

pub fn read_report(dir: &Path) -> Result<ReportFile> {
    let path = if dir.is_dir() { dir.join(SUMMARY_JSON) } else { dir.to_path_buf() };
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// One row of a study table: one model evaluated on one query set.
pub fn study_row(label: &str, report: &QueryReport) -> String {
    let s: &ReportSummary = &report.summary;
    format!(
        "{label},{},{},{},{},{},{},{},{},{},{}",
        report.delta,
        report.tau,
        report.dict_size,
        report.rank,
        opt(s.mean_primal_error),
        opt(s.mean_dual_error),
        opt(s.mean_iterations),
        opt(s.mean_time),
        opt(s.mean_per_iter_time),
        s.n_flagged
    )
}

pub const STUDY_HEADER: &str =
    "label,delta,tau,dict_size,rank,mean_primal_err,mean_dual_err,mean_iters,mean_time,mean_per_iter_time,n_flagged";
