//! Offline stage: training designs, high-fidelity snapshots, the reduced
//! model and its on-disk format.

mod design;
mod model;
mod persist;
mod snapshots;

pub use design::{DesignScheme, TrainingDesign};
pub use model::{build_reduced_model, ReducedModel, ReducedTerm};
pub use persist::{
    load_model, load_model_for, manifest_hash, manifest_json, read_manifest, save_model, BlockInfo, ModelManifest,
    MANIFEST,
};
pub use snapshots::{column_norms, generate_snapshots, solve_points, SnapshotSet};
