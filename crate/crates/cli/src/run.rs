//! The `run` command.
//!
//! Files written under `output_dir`:
//!
//! * `config.json`: resolved configuration and its hash.
//! * offline: `snapshots.csv` and the model directory at `model_path`.
//! * online: `points.csv`, `summary.json`, `sparsity.txt` (per-query
//!   errors, the run summary and the active-set patterns) and `study.csv`
//!   (one row of means, for bar charts across runs).
//! * chls: `chls.csv` (leave-one-out convex-hull errors) and, for problems
//!   with fixed constraints, `convex.csv` (convex-hull solver on training and
//!   validation points).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use contactrom_core::contact::{FullOrderModel, HfOptions};
use contactrom_core::convexhull::{chls_test, evaluate_convex, MonolithicDictionary, DEFAULT_DELTA_B};
use contactrom_core::fem::ContactSpec;
use contactrom_core::rom_offline::{
    build_reduced_model, generate_snapshots, load_model_for, manifest_hash, save_model, ReducedModel, SnapshotSet,
    MANIFEST,
};
use contactrom_core::rom_online::{
    evaluate_query_set, study_row, write_report, EvalOptions, GreedyOptions, ReportSummary, POINTS_CSV, SPARSITY_TXT,
    STUDY_HEADER, SUMMARY_JSON,
};
use serde::Serialize;

use crate::config::{RunConfig, Stage};
use crate::error::{CliError, CliResult};

pub const CONFIG_JSON: &str = "config.json";
pub const SNAPSHOTS_CSV: &str = "snapshots.csv";
pub const STUDY_CSV: &str = "study.csv";
pub const CHLS_CSV: &str = "chls.csv";
pub const CONVEX_CSV: &str = "convex.csv";

/// What a run produced.
#[derive(Clone, Debug, Default)]
pub struct RunOutcome {
    pub config_hash: String,
    pub files: Vec<PathBuf>,
    /// Summary of the validation sweep (online and full stages).
    pub summary: Option<ReportSummary>,
    /// Leave-one-out convex-hull errors (chls stage).
    pub chls: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct ConfigFile<'a> {
    config_hash: &'a str,
    config: &'a RunConfig,
}

pub fn run(cfg: &RunConfig) -> CliResult<RunOutcome> {
    fs::create_dir_all(&cfg.output_dir)?;
    let mut out = RunOutcome { config_hash: cfg.hash(), ..Default::default() };
    let path = cfg.output_dir.join(CONFIG_JSON);
    fs::write(&path, serde_json::to_vec_pretty(&ConfigFile { config_hash: &out.config_hash, config: cfg }).map_err(contactrom_core::Error::from)?)?;
    out.files.push(path);

    let fom = FullOrderModel::new(cfg.problem.build())?;
    let bounds = fom.problem.bounds.clone();
    let hf = HfOptions::default();

    if cfg.stage == Stage::Chls {
        let design = cfg.design.build(&bounds, cfg.seed)?;
        log::info!("{}: {} snapshots for the convex-hull study", cfg.problem, design.len());
        let snaps = generate_snapshots(&fom, &design, &hf)?;
        let dict = MonolithicDictionary::from_snapshots(&snaps)?;
        let eps = chls_test(&dict.d_u)?;
        out.files.push(write(&cfg.output_dir, CHLS_CSV, chls_csv(&snaps, &eps))?);
        out.chls = Some(eps);
        if matches!(fom.problem.contact, ContactSpec::Obstacle { .. }) {
            let validation = cfg.validation.build(&bounds, cfg.seed)?;
            let mut csv = header("set", bounds.len(), "convex_defect,penetration,slackness,sparsity,primal_err,dual_err,error");
            for (set, points) in [("train", &design.points), ("validation", &validation.points)] {
                for r in evaluate_convex(&dict, &fom, points, DEFAULT_DELTA_B, &hf) {
                    let _ = writeln!(
                        csv,
                        "{set},{}{},{},{},{},{},{},{}",
                        mu_cells(&r.mu),
                        r.convex_defect,
                        r.penetration,
                        r.slackness,
                        r.sparsity,
                        opt(r.primal_error),
                        opt(r.dual_error),
                        r.error.as_deref().unwrap_or("").replace(',', ";")
                    );
                }
            }
            out.files.push(write(&cfg.output_dir, CONVEX_CSV, csv)?);
        } else {
            log::info!("{}: constraints depend on the configuration; skipping the convex-hull solver", cfg.problem);
        }
        return Ok(out);
    }

    let model = if matches!(cfg.stage, Stage::Offline | Stage::Full) {
        let design = cfg.design.build(&bounds, cfg.seed)?;
        log::info!("{}: {} training snapshots", cfg.problem, design.len());
        let snaps = generate_snapshots(&fom, &design, &hf)?;
        out.files.push(write(&cfg.output_dir, SNAPSHOTS_CSV, snapshots_csv(&snaps))?);
        let model = build_reduced_model(&snaps, &fom.disc, cfg.delta)?;
        log::info!("{}: rank {} from {} snapshots (delta {:e})", cfg.problem, model.rank(), model.dict_size(), cfg.delta);
        save_model(&model, &cfg.model_path)?;
        out.files.push(cfg.model_path.clone());
        Some(model)
    } else {
        None
    };
    if cfg.stage == Stage::Offline {
        return Ok(out);
    }

    let model = match model {
        Some(m) => m,
        None => load_existing(cfg)?,
    };
    let validation = cfg.validation.build(&bounds, cfg.seed)?;
    log::info!("{}: {} validation queries", cfg.problem, validation.len());
    let opts = EvalOptions {
        greedy: GreedyOptions { k_max: cfg.k_max, conv_tol: cfg.conv_tol, tau: cfg.tau, ..Default::default() },
        hf,
        sequential_reference: cfg.sequential_reference,
    };
    let report = evaluate_query_set(&model, &fom, &validation.points, &opts)?;
    write_report(&report, &cfg.output_dir, &out.config_hash, &manifest_hash(&model)?)?;
    for f in [POINTS_CSV, SUMMARY_JSON, SPARSITY_TXT] {
        out.files.push(cfg.output_dir.join(f));
    }
    let label = format!("{}-dict{}-delta{:e}", cfg.problem, model.dict_size(), model.delta);
    out.files.push(write(&cfg.output_dir, STUDY_CSV, format!("{STUDY_HEADER}\n{}\n", study_row(&label, &report)))?);
    out.summary = Some(report.summary);
    Ok(out)
}

fn load_existing(cfg: &RunConfig) -> CliResult<ReducedModel> {
    if !cfg.model_path.join(MANIFEST).is_file() {
        return Err(CliError::Usage(format!(
            "no model at {} (run the offline stage first or pass --model-path)",
            cfg.model_path.display()
        )));
    }
    Ok(load_model_for(&cfg.model_path, &cfg.problem.build().id)?)
}

fn write(dir: &Path, name: &str, contents: String) -> CliResult<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn header(first: &str, n_params: usize, rest: &str) -> String {
    let mut h = format!("{first},");
    for i in 0..n_params {
        let _ = write!(h, "mu_{i},");
    }
    h + rest + "\n"
}

fn mu_cells(mu: &[f64]) -> String {
    mu.iter().map(|m| format!("{m},")).collect()
}

fn snapshots_csv(s: &SnapshotSet) -> String {
    let mut csv = header("index", s.design.bounds.len(), "iterations,kkt_residual,solve_time");
    for (j, mu) in s.design.points.iter().enumerate() {
        let _ = writeln!(csv, "{j},{}{},{},{}", mu_cells(mu), s.iterations[j], s.residuals[j].max(), s.solve_times[j]);
    }
    csv
}

fn chls_csv(s: &SnapshotSet, eps: &[f64]) -> String {
    let mut csv = header("index", s.design.bounds.len(), "chls_error");
    for (j, (mu, e)) in s.design.points.iter().zip(eps).enumerate() {
        let _ = writeln!(csv, "{j},{}{e}", mu_cells(mu));
    }
    csv
}
