use std::path::PathBuf;

use crate::contact::KktResiduals;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty basis: matrix has no energy")]
    EmptyBasis,

    #[error("zero matrix has no column space")]
    ZeroMatrix,

    #[error("dependent active constraints")]
    DependentConstraints,

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("singular system")]
    Singular,

    #[error("element {element} is inverted or degenerate")]
    InvertedElement { element: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("parameter {mu:?} outside of box {bounds:?}")]
    ParameterOutOfBox { mu: Vec<f64>, bounds: Vec<(f64, f64)> },

    #[error("master surface `{0}` is empty or missing")]
    EmptyMasterSurface(String),

    #[error("high-fidelity solve did not converge at mu = {mu:?} after {iterations} outer iterations ({residuals:?})")]
    HfNotConverged {
        mu: Vec<f64>,
        iterations: usize,
        residuals: KktResiduals,
        last_u: Vec<f64>,
        last_lam: Vec<f64>,
    },

    #[error("snapshot generation failed at mu = {mu:?}: {source}")]
    SnapshotFailed {
        mu: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("iteration diverged: {0}")]
    Divergence(String),

    #[error("checksum mismatch for {0}")]
    Checksum(PathBuf),

    #[error("version mismatch: file written by {found}, this is {expected}")]
    VersionMismatch { found: String, expected: String },

    #[error("model was built for problem `{model}`, query is for `{query}`")]
    ProblemMismatch { model: String, query: String },

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
