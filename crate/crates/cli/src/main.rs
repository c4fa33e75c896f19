use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use contactrom_cli::compare::{compare_tables, Thresholds, Tolerances};
use contactrom_cli::config::read_config_file;
use contactrom_cli::{configure_threads, run, CliError, CliResult, Problem, RunConfig, Settings, EXIT_USAGE};
use contactrom_core::fem::save_mesh;
use contactrom_core::rom_online::read_report;

#[derive(Parser)]
#[command(name = "contactrom", version, about = "Sparse dictionary reduced-order models for frictionless contact")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a model, run a validation sweep, or run the convex-hull study.
    Run {
        /// TOML or JSON file with the same keys as the flags (snake_case);
        /// flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Ratio table of the means of two reports (`b / a`).
    Compare {
        /// Baseline report (directory or summary.json).
        a: PathBuf,
        /// Candidate report.
        b: PathBuf,
        /// Fail if a mean error of `b` exceeds this multiple of `a`'s.
        #[arg(long)]
        max_error_ratio: Option<f64>,
        /// Fail unless `b` improves the mean dual error by this factor.
        #[arg(long)]
        min_dual_gain: Option<f64>,
        /// TOML or JSON thresholds checked against `b`.
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
    /// Write a benchmark mesh: `<out>.json` (topology, surfaces) and `<out>.bin` (coordinates).
    Mesh {
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Run { config, settings } => {
            let base = match &config {
                Some(path) => Settings::from_file(path)?,
                None => Settings::default(),
            };
            let cfg = RunConfig::resolve(base.overlay(settings))?;
            let outcome = run(&cfg)?;
            println!("config {}", outcome.config_hash);
            if let Some(s) = &outcome.summary {
                println!("{}", serde_json::to_string_pretty(s).map_err(contactrom_core::Error::from)?);
                if s.n_flagged > 0 {
                    eprintln!("{} of {} queries flagged (see points.csv)", s.n_flagged, s.n_points);
                }
            }
            if let Some(eps) = &outcome.chls {
                println!("chls errors: {eps:?}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Compare { a, b, max_error_ratio, min_dual_gain, thresholds } => {
            let (ra, rb) = (read_report(&a)?, read_report(&b)?);
            let cmp = compare_tables(&ra.report, &rb.report)?;
            print!("{}", cmp.table());
            let mut failures = Tolerances { max_error_ratio, min_dual_gain }.check(&cmp);
            if let Some(path) = thresholds {
                failures.extend(read_config_file::<Thresholds>(&path)?.check(&rb.report.summary));
            }
            if failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::Acceptance(failures))
            }
        }
        Command::Mesh { problem, out } => {
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            save_mesh(&problem.build().mesh, &out)?;
            println!("wrote {}.*", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Err(e) = configure_threads().and_then(|()| execute(cli.command)) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    ExitCode::SUCCESS
}
