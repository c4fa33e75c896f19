#![allow(dead_code)]

use contactrom_core::convexhull::{obstacle, RIGHT_STIFFNESS};
use contactrom_core::{DenseMatrix, Vector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Paley conference matrix of order `q + 1` for a prime `q = 1 (mod 4)`:
/// zero diagonal, +-1 elsewhere, `C^T C = q I`.
pub fn paley_conference(q: usize) -> DenseMatrix {
    let residue: Vec<bool> = (0..q).map(|a| a != 0 && (1..q).any(|b| b * b % q == a)).collect();
    let chi = |a: usize| if a == 0 { 0.0 } else if residue[a] { 1.0 } else { -1.0 };
    DenseMatrix::from_fn(q + 1, q + 1, |i, j| match (i, j) {
        (0, 0) => 0.0,
        (0, _) | (_, 0) => 1.0,
        _ => chi((i + q - j) % q),
    })
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).qr().q()
}

/// Randomly rotated, permuted and sign-flipped union of the identity and a
/// normalised conference matrix: a 30 x 60 unit-norm frame with mutual
/// coherence `1/sqrt(29)`.
pub fn incoherent_dictionary(rng: &mut ChaCha8Rng) -> DenseMatrix {
    let c = paley_conference(29) / 29f64.sqrt();
    let mut frame = DenseMatrix::zeros(30, 60);
    frame.view_mut((0, 0), (30, 30)).copy_from(&DenseMatrix::identity(30, 30));
    frame.view_mut((0, 30), (30, 30)).copy_from(&c);
    let q = random_orthogonal(rng, 30);
    let mut perm: Vec<usize> = (0..60).collect();
    perm.shuffle(rng);
    let rotated = q * frame;
    DenseMatrix::from_fn(30, 60, |i, j| {
        let s = if (perm[j] * 7 + j) % 2 == 0 { 1.0 } else { -1.0 };
        s * rotated[(i, perm[j])]
    })
}

pub fn mutual_coherence(d: &DenseMatrix) -> f64 {
    let mut mu: f64 = 0.0;
    for i in 0..d.ncols() {
        for j in i + 1..d.ncols() {
            let c = d.column(i).dot(&d.column(j)) / (d.column(i).norm() * d.column(j).norm());
            mu = mu.max(c.abs());
        }
    }
    mu
}

/// Support of the best least-squares fit over every `k`-subset of columns.
pub fn best_subset(d: &DenseMatrix, x: &Vector, k: usize) -> Vec<usize> {
    let n = d.ncols();
    let mut best = (f64::INFINITY, Vec::new());
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let sub = d.select_columns(idx.iter());
        let gram = sub.tr_mul(&sub);
        if let Some(chol) = gram.cholesky() {
            let a = chol.solve(&sub.tr_mul(x));
            let r = (x - &sub * a).norm();
            if r < best.0 {
                best = (r, idx.clone());
            }
        }
        // next combination in lexicographic order
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return best.1;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// A `k`-sparse combination of dictionary columns with coefficient
/// magnitudes in `[0.5, 1.5]` and random signs.
pub fn sparse_signal(rng: &mut ChaCha8Rng, d: &DenseMatrix, k: usize) -> (Vector, Vec<usize>) {
    let mut cols: Vec<usize> = (0..d.ncols()).collect();
    cols.shuffle(rng);
    let mut support = cols[..k].to_vec();
    support.sort();
    let mut x = Vector::zeros(d.nrows());
    for &j in &support {
        let a: f64 = rng.random_range(0.5..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        x += d.column(j) * a;
    }
    (x, support)
}

/// Exhaustive enumeration over all active sets of the discrete obstacle
/// problem, with an independently assembled bar stiffness.
pub fn rope_by_enumeration(n: usize, gamma: f64, load: f64) -> (Vec<f64>, Vec<f64>) {
    let h = 1.0 / (n - 1) as f64;
    let mut k = DenseMatrix::zeros(n, n);
    for e in 0..n - 1 {
        let mid = (e as f64 + 0.5) * h;
        let nu = if mid < 0.5 { gamma } else { RIGHT_STIFFNESS };
        for (a, b, s) in [(e, e, 1.0), (e + 1, e + 1, 1.0), (e, e + 1, -1.0), (e + 1, e, -1.0)] {
            k[(a, b)] += s * nu / h;
        }
    }
    let f: Vec<f64> = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * load * h } else { load * h }).collect();
    let psi: Vec<f64> = (0..n).map(|i| obstacle(i as f64 * h)).collect();
    let cand: Vec<usize> = (1..n - 1).collect();
    let mut found = Vec::new();
    for mask in 0u32..(1 << cand.len()) {
        let active: Vec<usize> = cand.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i).collect();
        let free: Vec<usize> = cand.iter().copied().filter(|i| !active.contains(i)).collect();
        let mut u = vec![0.0; n];
        for &i in &active {
            u[i] = psi[i];
        }
        if !free.is_empty() {
            let a = DenseMatrix::from_fn(free.len(), free.len(), |r, c| k[(free[r], free[c])]);
            let rhs = Vector::from_fn(free.len(), |r, _| {
                f[free[r]] - active.iter().map(|&j| k[(free[r], j)] * psi[j]).sum::<f64>()
            });
            let x = a.lu().solve(&rhs).unwrap();
            for (r, &i) in free.iter().enumerate() {
                u[i] = x[r];
            }
        }
        let ku = &k * Vector::from_vec(u.clone());
        let lam: Vec<f64> = cand.iter().map(|&i| if active.contains(&i) { ku[i] - f[i] } else { 0.0 }).collect();
        let feasible = lam.iter().all(|&l| l >= -1e-12) && free.iter().all(|&i| u[i] >= psi[i] - 1e-12);
        if feasible {
            found.push((u, lam));
        }
    }
    assert!(!found.is_empty(), "no feasible active set");
    // degenerate ties yield the same solution; keep the first
    found.swap_remove(0)
}
