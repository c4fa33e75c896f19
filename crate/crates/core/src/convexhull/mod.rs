//! Convex-hull approximation with monolithic dictionaries and the rope
//! obstacle benchmark.

mod hull;
mod rope;

pub use hull::{
    chls_test, convex_solve, convex_solve_observed, evaluate_convex, ConvexRecord, ConvexResult, MonolithicDictionary,
    DEFAULT_DELTA_B, SUM_ROW_WEIGHT,
};
pub use rope::{obstacle, rope_problem, RopeOptions, RIGHT_STIFFNESS};
