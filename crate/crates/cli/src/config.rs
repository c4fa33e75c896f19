//! Run configuration: a TOML/JSON file and command-line flags, merged and
//! completed with per-problem defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{ArgAction, Args, ValueEnum};
use contactrom_core::benchmarks;
use contactrom_core::fem::ElasticProblem;
use contactrom_core::rom_offline::{DesignScheme, TrainingDesign};
use contactrom_core::rom_online::{DEFAULT_CONV_TOL, DEFAULT_K_MAX};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Hertz,
    Ironing,
    Ironing2p,
    Rope,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Hertz => "hertz",
            Problem::Ironing => "ironing",
            Problem::Ironing2p => "ironing2p",
            Problem::Rope => "rope",
        }
    }

    pub fn build(self) -> ElasticProblem {
        benchmarks::by_name(self.name()).expect("every variant names a benchmark")
    }

    /// Training set, validation set and truncation tolerance of the
    /// reference study for this problem.
    fn defaults(self) -> (DesignSpec, DesignSpec, f64) {
        let s = DesignSpec::Scheme;
        match self {
            Problem::Hertz => (s(DesignScheme::Uniform { n: 30 }), s(DesignScheme::Midpoints { n: 120 }), 1e-6),
            Problem::Ironing => (s(DesignScheme::Nested { level: 7 }), s(DesignScheme::NestedComplement { level: 8 }), 1e-8),
            Problem::Ironing2p => (s(DesignScheme::Nested { level: 3 }), s(DesignScheme::NestedComplement { level: 4 }), 1e-8),
            Problem::Rope => (s(DesignScheme::Nested { level: 3 }), s(DesignScheme::NestedComplement { level: 4 }), 1e-10),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Snapshots and reduced model.
    Offline,
    /// Validation sweep against a saved model.
    Online,
    /// Offline then online.
    Full,
    /// Leave-one-out convex-hull errors and, for fixed constraints, the
    /// convex-hull solver on training and validation points.
    Chls,
}

/// A parameter design: any [`DesignScheme`] string, or `random:N` for `N`
/// points drawn uniformly in the box from the run's seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DesignSpec {
    Scheme(DesignScheme),
    Random { n: usize },
}

impl DesignSpec {
    pub fn build(self, bounds: &[(f64, f64)], seed: u64) -> CliResult<TrainingDesign> {
        Ok(match self {
            DesignSpec::Scheme(s) => TrainingDesign::new(bounds, s)?,
            DesignSpec::Random { n } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let points = (0..n).map(|_| bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect()).collect();
                TrainingDesign::explicit(bounds, points)?
            }
        })
    }
}

impl FromStr for DesignSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(n) = s.trim().strip_prefix("random:") {
            return match n.trim().parse() {
                Ok(n) if n > 0 => Ok(DesignSpec::Random { n }),
                _ => Err(format!("bad design `{s}` (expected random:N with N > 0)")),
            };
        }
        s.parse().map(DesignSpec::Scheme).map_err(|e: contactrom_core::Error| e.to_string())
    }
}

impl TryFrom<String> for DesignSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<DesignSpec> for String {
    fn from(d: DesignSpec) -> String {
        d.to_string()
    }
}

impl fmt::Display for DesignSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignSpec::Scheme(s) => s.fmt(f),
            DesignSpec::Random { n } => write!(f, "random:{n}"),
        }
    }
}

/// Partially specified configuration, as read from a file or from flags.
#[derive(Clone, Debug, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[arg(long, value_enum)]
    pub problem: Option<Problem>,
    #[arg(long, value_enum)]
    pub stage: Option<Stage>,
    /// Training design, e.g. `uniform:30`, `nested:7`.
    #[arg(long)]
    pub design: Option<DesignSpec>,
    /// Validation design, e.g. `midpoints:120`, `nested-complement:8`, `random:20`.
    #[arg(long)]
    pub validation: Option<DesignSpec>,
    /// Primal truncation tolerance.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Permitted projected penetration (defaults to `delta`).
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub conv_tol: Option<f64>,
    /// Seed of `random:N` designs.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Model directory (defaults to `<output_dir>/model`).
    #[arg(long)]
    pub model_path: Option<PathBuf>,
    /// Solve validation references one at a time so their timings compare
    /// with the online ones.
    #[arg(long, action = ArgAction::Set, value_name = "BOOL")]
    pub sequential_reference: Option<bool>,
}

impl Settings {
    /// Read a `.toml` or `.json` file.
    pub fn from_file(path: &Path) -> CliResult<Self> {
        read_config_file(path)
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: Settings) -> Settings {
        Settings {
            problem: over.problem.or(self.problem),
            stage: over.stage.or(self.stage),
            design: over.design.or(self.design),
            validation: over.validation.or(self.validation),
            delta: over.delta.or(self.delta),
            tau: over.tau.or(self.tau),
            k_max: over.k_max.or(self.k_max),
            conv_tol: over.conv_tol.or(self.conv_tol),
            seed: over.seed.or(self.seed),
            output_dir: over.output_dir.or(self.output_dir),
            model_path: over.model_path.or(self.model_path),
            sequential_reference: over.sequential_reference.or(self.sequential_reference),
        }
    }
}

/// Parse a TOML or JSON file, chosen by extension.
pub fn read_config_file<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let bad = |e: &dyn fmt::Display| CliError::Usage(format!("bad config {}: {e}", path.display()));
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text).map_err(|e| bad(&e)),
        Some("json") => serde_json::from_str(&text).map_err(|e| bad(&e)),
        _ => Err(CliError::Usage(format!("{}: config files must end in .toml or .json", path.display()))),
    }
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: Problem,
    pub stage: Stage,
    pub design: DesignSpec,
    pub validation: DesignSpec,
    pub delta: f64,
    pub tau: Option<f64>,
    pub k_max: usize,
    pub conv_tol: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub model_path: PathBuf,
    pub sequential_reference: bool,
}

impl RunConfig {
    pub fn resolve(s: Settings) -> CliResult<Self> {
        let problem = s.problem.ok_or_else(|| CliError::Usage("--problem is required".into()))?;
        let (design, validation, delta) = problem.defaults();
        let output_dir = s.output_dir.unwrap_or_else(|| PathBuf::from("out").join(problem.name()));
        let cfg = RunConfig {
            problem,
            stage: s.stage.unwrap_or(Stage::Full),
            design: s.design.unwrap_or(design),
            validation: s.validation.unwrap_or(validation),
            delta: s.delta.unwrap_or(delta),
            tau: s.tau,
            k_max: s.k_max.unwrap_or(DEFAULT_K_MAX),
            conv_tol: s.conv_tol.unwrap_or(DEFAULT_CONV_TOL),
            seed: s.seed.unwrap_or(0),
            model_path: s.model_path.unwrap_or_else(|| output_dir.join("model")),
            output_dir,
            sequential_reference: s.sequential_reference.unwrap_or(true),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if let Some(tau) = self.tau {
            if !(tau >= 0.0 && tau.is_finite()) {
                return bad(format!("tau must be finite and nonnegative, got {tau}"));
            }
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        if !(self.conv_tol > 0.0 && self.conv_tol.is_finite()) {
            return bad(format!("conv_tol must be positive, got {}", self.conv_tol));
        }
        Ok(())
    }

    /// SHA-256 of everything that determines the numbers of a run; output
    /// locations are left out so relocated reruns hash the same.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serialises");
        if let Some(map) = v.as_object_mut() {
            map.remove("output_dir");
            map.remove("model_path");
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }
}
