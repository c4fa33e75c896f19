//! The `compare` command: ratio tables between two reports and pass/fail
//! checks against tolerances or stored thresholds.

use std::fmt::Write as _;

use contactrom_core::rom_online::{QueryReport, ReportSummary};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// One metric of both reports; `ratio = b / a`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub metric: &'static str,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub problem_id: String,
    pub rows: Vec<RatioRow>,
}

fn metrics(s: &ReportSummary) -> [(&'static str, Option<f64>); 9] {
    [
        ("mean_primal_error", s.mean_primal_error),
        ("mean_dual_error", s.mean_dual_error),
        ("median_active", s.median_active),
        ("mean_iterations", s.mean_iterations),
        ("mean_time", s.mean_time),
        ("mean_per_iter_time", s.mean_per_iter_time),
        ("mean_hf_time", s.mean_hf_time),
        ("speedup", s.speedup),
        ("n_flagged", Some(s.n_flagged as f64)),
    ]
}

/// Side-by-side means of two reports on the same problem.
pub fn compare_tables(a: &QueryReport, b: &QueryReport) -> CliResult<Comparison> {
    if a.problem_id != b.problem_id {
        return Err(CliError::Usage(format!("reports are for different problems: `{}` vs `{}`", a.problem_id, b.problem_id)));
    }
    let rows = metrics(&a.summary)
        .into_iter()
        .zip(metrics(&b.summary))
        .map(|((metric, a), (_, b))| {
            let ratio = match (a, b) {
                (Some(x), Some(y)) if x == y => Some(1.0),
                (Some(x), Some(y)) if x != 0.0 => Some(y / x),
                _ => None,
            };
            RatioRow { metric, a, b, ratio }
        })
        .collect();
    Ok(Comparison { problem_id: a.problem_id.clone(), rows })
}

impl Comparison {
    pub fn row(&self, metric: &str) -> Option<&RatioRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn table(&self) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4e}"));
        let mut out = format!("problem {}\n{:<20} {:>12} {:>12} {:>12}\n", self.problem_id, "metric", "a", "b", "b/a");
        for r in &self.rows {
            let _ = writeln!(out, "{:<20} {:>12} {:>12} {:>12}", r.metric, cell(r.a), cell(r.b), cell(r.ratio));
        }
        out
    }
}

/// Tolerances on a comparison of a baseline `a` with a candidate `b`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tolerances {
    /// Largest allowed `b / a` of the mean primal and dual errors.
    pub max_error_ratio: Option<f64>,
    /// Smallest required `a / b` of the mean dual error.
    pub min_dual_gain: Option<f64>,
}

impl Tolerances {
    /// Violations, one message each.
    pub fn check(&self, cmp: &Comparison) -> Vec<String> {
        let mut failures = Vec::new();
        if let Some(max) = self.max_error_ratio {
            for metric in ["mean_primal_error", "mean_dual_error"] {
                match cmp.row(metric).and_then(|r| r.ratio) {
                    Some(ratio) if ratio <= max => {}
                    Some(ratio) => failures.push(format!("{metric}: ratio {ratio:.3e} > {max}")),
                    None => failures.push(format!("{metric}: missing in one of the reports")),
                }
            }
        }
        if let Some(min) = self.min_dual_gain {
            match cmp.row("mean_dual_error").and_then(|r| r.ratio) {
                Some(ratio) if ratio > 0.0 && 1.0 / ratio >= min => {}
                Some(ratio) => failures.push(format!("mean_dual_error: gain {:.3e} < {min}", 1.0 / ratio)),
                None => failures.push("mean_dual_error: missing in one of the reports".into()),
            }
        }
        failures
    }
}

/// Stored pass/fail thresholds for a single report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub max_mean_primal_error: Option<f64>,
    pub max_mean_dual_error: Option<f64>,
    pub max_median_active: Option<f64>,
    pub max_flagged: Option<usize>,
    pub min_speedup: Option<f64>,
}

impl Thresholds {
    pub fn check(&self, s: &ReportSummary) -> Vec<String> {
        let mut failures = Vec::new();
        let mut upper = |name: &str, value: Option<f64>, bound: Option<f64>| {
            if let Some(bound) = bound {
                match value {
                    Some(v) if v <= bound => {}
                    Some(v) => failures.push(format!("{name} {v:.3e} > {bound}")),
                    None => failures.push(format!("{name} missing")),
                }
            }
        };
        upper("mean_primal_error", s.mean_primal_error, self.max_mean_primal_error);
        upper("mean_dual_error", s.mean_dual_error, self.max_mean_dual_error);
        upper("median_active", s.median_active, self.max_median_active);
        upper("n_flagged", Some(s.n_flagged as f64), self.max_flagged.map(|m| m as f64));
        if let Some(min) = self.min_speedup {
            match s.speedup {
                Some(v) if v >= min => {}
                Some(v) => failures.push(format!("speedup {v:.1} < {min}")),
                None => failures.push("speedup missing".into()),
            }
        }
        failures
    }
}
