mod common;

use common::{best_subset, incoherent_dictionary, mutual_coherence, paley_conference, sparse_signal};
use contactrom_core::densela::{nnls, truncated_svd};
use contactrom_core::sparse::{focuss_observed, min_norm_solution, nnfocuss, nnfocuss_observed, omp, random_sketch};
use contactrom_core::{DenseMatrix, Vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn conference_matrix_is_orthogonal_up_to_scale() {
    let c = paley_conference(29);
    let gram = c.tr_mul(&c);
    assert!((gram - DenseMatrix::identity(30, 30) * 29.0).amax() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = incoherent_dictionary(&mut rng);
    assert!(mutual_coherence(&d) < 0.2);
}

#[test]
fn omp_recovers_three_sparse_signals() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = incoherent_dictionary(&mut rng);
        let (x, support) = sparse_signal(&mut rng, &d, 3);
        let s = omp(&d, &x, 1e-10, 3).unwrap();
        let mut got = s.support.clone();
        got.sort();
        assert_eq!(got, support, "seed {seed}");
        assert_eq!(best_subset(&d, &x, 3), support);
        assert!(s.converged);
    }
}

/// Oracle: the unique 2-column subset with an exact nonnegative fit.
fn nonneg_subset_oracle(d: &DenseMatrix, x: &Vector) -> Vec<usize> {
    let mut hits = Vec::new();
    for i in 0..d.ncols() {
        for j in i + 1..d.ncols() {
            let sub = d.select_columns([i, j].iter());
            let a = nnls(&sub, x);
            if (x - &sub * &a).norm() < 1e-10 * x.norm() && a.iter().all(|&v| v > 0.0) {
                hits.push(vec![i, j]);
            }
        }
    }
    assert_eq!(hits.len(), 1);
    hits.pop().unwrap()
}

/// FOCUSS cannot revive a coefficient once it is zero, so recovery is only
/// possible when the NNLS start covers the true pair. In that case the
/// iteration must collapse onto exactly that pair; otherwise it must stay
/// an exact nonnegative fit on the starting support.
#[test]
fn nnfocuss_recovers_two_sparse_nonnegative_combinations() {
    let (mut covered, mut recovered) = (0, 0);
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let d = DenseMatrix::from_fn(4, 8, |_, _| rng.random_range(0.0..1.0));
        let i = rng.random_range(0..8);
        let j = (i + rng.random_range(1..8)) % 8;
        let x = d.column(i) * rng.random_range(0.5..1.5) + d.column(j) * rng.random_range(0.5..1.5);
        let oracle = nonneg_subset_oracle(&d, &x);
        let start = nnls(&d, &x);
        let s = nnfocuss(&d, &x, 1e-10, 500).unwrap();
        assert!(s.values.iter().all(|&v| v >= 0.0));
        assert!(s.residual_norm < 1e-9 * x.norm());
        assert!(s.support.iter().all(|&k| start[k] > 0.0));
        if oracle.iter().all(|&k| start[k] > 0.0) {
            covered += 1;
            assert_eq!(s.support, oracle, "seed {seed}");
        }
        recovered += usize::from(s.support == oracle);
    }
    assert!(covered >= 25, "{covered}/50 starts cover the true pair");
    assert_eq!(recovered, covered);
}

#[test]
fn sketch_captures_leading_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = common::random_orthogonal(&mut rng, 40);
    let v = common::random_orthogonal(&mut rng, 100);
    let sigma = DenseMatrix::from_fn(40, 100, |i, j| if i == j { 0.7f64.powi(i as i32) } else { 0.0 });
    let d = u * sigma * v.transpose();
    let top = truncated_svd(&d, 1e-15).unwrap().singular_values[0];
    let mut hits = 0;
    for seed in 0..100 {
        let b = random_sketch(&d, 5, seed).unwrap();
        assert_eq!(b.ncols(), 5);
        if b.tr_mul(&d).norm_squared() >= top * top {
            hits += 1;
        }
    }
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn sketch_rank_deficient_input_returns_attained_rank() {
    let col = Vector::from_vec(vec![1.0, 2.0, 3.0]);
    let d = DenseMatrix::from_columns(&[col.clone(), col.clone() * 2.0, col * -1.0]);
    let b = random_sketch(&d, 3, 0).unwrap();
    assert_eq!(b.ncols(), 1);
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |v| DenseMatrix::from_vec(rows, cols, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn omp_residual_never_increases(d in matrix(12, 20), x in prop::collection::vec(-1.0f64..1.0, 12)) {
        let x = Vector::from_vec(x);
        let mut last = x.norm();
        for k in 1..=8 {
            let s = omp(&d, &x, 0.0, k).unwrap();
            prop_assert!(s.residual_norm <= last * (1.0 + 1e-12) + 1e-14);
            last = s.residual_norm;
            let sub = d.select_columns(s.support.iter());
            let a = Vector::from_iterator(s.support.len(), s.support.iter().map(|&j| s.values[j]));
            let r = &x - &sub * a;
            prop_assert!((sub.tr_mul(&r)).amax() < 1e-10);
            let mut uniq = s.support.clone();
            uniq.sort();
            uniq.dedup();
            prop_assert_eq!(uniq.len(), s.support.len());
        }
    }

    #[test]
    fn nnfocuss_iterates_stay_nonnegative(d in matrix(6, 10), x in prop::collection::vec(-1.0f64..1.0, 6)) {
        let x = Vector::from_vec(x);
        let mut min = f64::INFINITY;
        nnfocuss_observed(&d, &x, 1e-10, 200, |a| min = min.min(a.min())).unwrap();
        prop_assert!(min >= 0.0);
    }

    #[test]
    fn focuss_zero_entries_stay_zero(d in matrix(5, 9), x in prop::collection::vec(-1.0f64..1.0, 5), zero in 0usize..9) {
        let x = Vector::from_vec(x);
        let mut a0 = min_norm_solution(&d, &x);
        a0[zero] = 0.0;
        let mut zeros: Vec<bool> = a0.iter().map(|&v| v == 0.0).collect();
        let mut ok = true;
        let _ = focuss_observed(&d, &x, &a0, 1e-10, 200, |a| {
            for i in 0..a.len() {
                if zeros[i] && a[i] != 0.0 {
                    ok = false;
                }
                zeros[i] |= a[i] == 0.0;
            }
        });
        prop_assert!(ok);
    }
}
