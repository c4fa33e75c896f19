//! Reduced-order modelling of frictionless, non-adhesive contact with
//! over-complete snapshot dictionaries.
//!
//! The crate is organised bottom-up:
//!
//! * [`densela`]: dense linear algebra (truncated SVD, saddle solves, NNLS).
//! * [`fem`]: meshes, plane-strain / rope assembly and discrete error norms.
//! * [`contact`]: node-to-segment kinematics and the high-fidelity
//!   Lagrange-multiplier solver.
//! * [`sparse`]: OMP, FOCUSS, nnFOCUSS and randomized sketching.
//! * [`rom_offline`]: training designs, snapshots, reduced models, persistence.
//! * [`rom_online`]: the greedy active-set online solver and query reports.
//! * [`convexhull`]: monolithic-dictionary convex-hull approximation and the
//!   rope/obstacle benchmark.
//! * [`benchmarks`]: the Hertz and ironing benchmark problems.

pub mod benchmarks;
pub mod contact;
pub mod convexhull;
pub mod densela;
mod error;
pub mod fem;
pub mod rom_offline;
pub mod rom_online;
pub mod sparse;

pub use densela::{DenseMatrix, TruncatedBasis, Vector};
pub use error::{Error, Result};

/// Version string written into persisted manifests.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
