//! Online stage: the greedy active-set solver over a sparse dual dictionary,
//! query-set evaluation and report files.

mod evaluate;
mod greedy;
mod report;

pub use evaluate::{evaluate_query_set, median, query_errors, EvalOptions, QueryRecord, QueryReport, ReportSummary};
pub use greedy::{
    greedy_active_set, reduce_constraints, GreedyOptions, GreedyState, GreedyStatus, InitialPairing, OnlineResult,
    OnlineSolver, ReducedConstraints, DEFAULT_CONV_TOL, DEFAULT_K_MAX,
};
pub use report::{
    points_csv, read_report, sparsity_list, study_row, write_report, ReportFile, POINTS_CSV, SPARSITY_TXT,
    STUDY_HEADER, SUMMARY_JSON, TIMING_COLUMNS,
};
