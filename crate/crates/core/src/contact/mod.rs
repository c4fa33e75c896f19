//! Node-to-segment contact kinematics and the high-fidelity
//! Lagrange-multiplier solver.

mod hf;
mod pairing;

pub use hf::{
    kkt_residuals, solve_hf, FullOrderModel, HfOptions, HfSolution, KktResiduals, DEFAULT_HF_TOL, DEFAULT_MAX_OUTER,
};
pub use pairing::{detect_pairs, ContactSystem, Pairing};
