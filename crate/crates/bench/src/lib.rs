//! Fixtures shared by the benchmarks.

use contactrom_core::benchmarks;
use contactrom_core::contact::{FullOrderModel, HfOptions};
use contactrom_core::rom_offline::{build_reduced_model, generate_snapshots, ReducedModel, TrainingDesign};
use contactrom_core::{DenseMatrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hertz full-order model and a reduced model built from `uniform(n)`.
pub fn hertz_model(n: usize, delta: f64) -> (FullOrderModel, ReducedModel) {
    let fom = FullOrderModel::new(benchmarks::hertz()).expect("hertz benchmark");
    let design = TrainingDesign::uniform(&fom.problem.bounds, n).expect("design");
    let snaps = generate_snapshots(&fom, &design, &HfOptions::default()).expect("snapshots");
    let model = build_reduced_model(&snaps, &fom.disc, delta).expect("model");
    (fom, model)
}

/// Uniform(-1, 1) matrix.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// `d * a` for a nonnegative `k`-sparse `a`.
pub fn sparse_target(d: &DenseMatrix, k: usize, seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vector::zeros(d.ncols());
    for _ in 0..k {
        a[rng.random_range(0..d.ncols())] = rng.random_range(0.5..1.5);
    }
    d * a
}
