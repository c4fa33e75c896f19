use serde::{Deserialize, Serialize};

use crate::contact::{FullOrderModel, HfOptions};
use crate::densela::{nnls, truncated_svd, DenseMatrix, Vector};
use crate::fem::{h1_error, l2_surface_error, ContactSpec};
use crate::rom_offline::{solve_points, SnapshotSet};
use crate::sparse::{nnfocuss_observed, DEFAULT_FOCUSS_MAX_ITER, DEFAULT_FOCUSS_TOL};
use crate::{Error, Result};

/// Truncation of the residual projection basis `B`.
pub const DEFAULT_DELTA_B: f64 = 1e-7;
/// Weight of the appended sum row, relative to the Frobenius norm of the
/// rows it is stacked under.
pub const SUM_ROW_WEIGHT: f64 = 1.0;

/// Displacement snapshots stacked over multiplier snapshots; one shared
/// coefficient per column.
#[derive(Clone, Debug, PartialEq)]
pub struct MonolithicDictionary {
    /// Free-dof displacements.
    pub d_u: DenseMatrix,
    pub d_lam: DenseMatrix,
    /// Parameter of each column.
    pub labels: Vec<Vec<f64>>,
}

impl MonolithicDictionary {
    pub fn new(d_u: DenseMatrix, d_lam: DenseMatrix, labels: Vec<Vec<f64>>) -> Result<Self> {
        if d_u.ncols() != d_lam.ncols() || d_u.ncols() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "monolithic dictionary: {} displacement columns, {} multiplier columns, {} labels",
                d_u.ncols(),
                d_lam.ncols(),
                labels.len()
            )));
        }
        Ok(Self { d_u, d_lam, labels })
    }

    pub fn from_snapshots(snaps: &SnapshotSet) -> Result<Self> {
        Self::new(snaps.u.clone(), snaps.lam.clone(), snaps.design.points.clone())
    }

    pub fn len(&self) -> usize {
        self.d_u.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexResult {
    pub alpha: Vector,
    /// `|1^T alpha - 1|`
    pub convex_defect: f64,
    /// `max(0, max_i (C u - g)_i)`
    pub penetration: f64,
    /// `|lam^T (C u - g)|`
    pub slackness: f64,
    /// Number of nonzero coefficients.
    pub sparsity: usize,
    /// Full displacement `D_u alpha` with the Dirichlet values.
    pub u: Vector,
    /// `D_lam alpha`
    pub lam: Vector,
    pub iterations: usize,
}

/// `min |M a - x|` over the simplex `a >= 0`, `1^T a = 1`.
fn simplex_lsq(m: &DenseMatrix, x: &Vector) -> Vector {
    let (d, rhs) = with_sum_row(m, x);
    normalize_simplex(nnls(&d, &rhs))
}

/// Homogeneous form of the simplex least-squares problem: with
/// `A = M - x 1^T`, minimise `|A b|^2 + w^2 (1^T b - 1)^2` over `b >= 0`.
/// Its KKT conditions are those of the simplex problem up to the positive
/// factor `1^T b`, so `a = b / 1^T b` is the simplex solution for any
/// weight `w > 0`. A moderate weight keeps the sum row from drowning the
/// gradient in rounding noise, which a heavily weighted `[M; w 1^T]` row
/// does once the residual gets small.
fn with_sum_row(m: &DenseMatrix, x: &Vector) -> (DenseMatrix, Vector) {
    let mut a = m.clone();
    for mut col in a.column_iter_mut() {
        col -= x;
    }
    let w = SUM_ROW_WEIGHT * a.norm().max(f64::MIN_POSITIVE);
    let mut d = a.insert_row(m.nrows(), w);
    d.row_mut(m.nrows()).fill(w);
    let mut rhs = Vector::zeros(x.len() + 1);
    rhs[x.len()] = w;
    (d, rhs)
}

fn normalize_simplex(mut b: Vector) -> Vector {
    let s = b.sum();
    if s > 0.0 {
        b /= s;
    }
    b
}

/// Leave-one-out convex hull least-squares errors: for each column `d`,
/// `min |D~ a - d| / |d|` over the simplex, with `D~` the other columns.
pub fn chls_test(d_u: &DenseMatrix) -> Result<Vec<f64>> {
    let n = d_u.ncols();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("chls_test needs at least 2 columns, got {n}")));
    }
    Ok((0..n)
        .map(|k| {
            let others = d_u.clone().remove_column(k);
            let d = d_u.column(k).into_owned();
            let a = simplex_lsq(&others, &d);
            let r = (&others * a - &d).norm();
            let scale = d.norm();
            if scale > 0.0 {
                r / scale
            } else {
                r
            }
        })
        .collect())
}

/// Convex-hull online solve at `mu`: nnFOCUSS on the monolithic residual
/// projected onto `B = svd(D_u, delta_b)`, with the sum row appended in
/// homogeneous form (see `with_sum_row`) and the result rescaled onto the
/// simplex.
pub fn convex_solve(dict: &MonolithicDictionary, fom: &FullOrderModel, mu: &[f64], delta_b: f64) -> Result<ConvexResult> {
    convex_solve_observed(dict, fom, mu, delta_b, |_| {})
}

/// [`convex_solve`] reporting every nnFOCUSS iterate.
pub fn convex_solve_observed(
    dict: &MonolithicDictionary,
    fom: &FullOrderModel,
    mu: &[f64],
    delta_b: f64,
    observe: impl FnMut(&Vector),
) -> Result<ConvexResult> {
    if !matches!(fom.problem.contact, ContactSpec::Obstacle { .. }) {
        return Err(Error::InvalidArgument(
            "convex hull approximation needs configuration-independent constraints (obstacle contact)".into(),
        ));
    }
    fom.problem.check_mu(mu)?;
    let disc = &fom.disc;
    if dict.is_empty() || dict.d_u.nrows() != disc.n_free() || dict.d_lam.nrows() != fom.num_duals() {
        return Err(Error::DimensionMismatch("monolithic dictionary does not fit the problem".into()));
    }
    let k = fom.stiffness(mu);
    let cs = fom.detect_pairs(&Vector::zeros(disc.n_dofs))?;

    // K_mono = K_ff D_u + C_f^T D_lam, right hand side f_f - K_fd u_d
    let k_ff = disc.free_rows(&k, &disc.free);
    let mut c_t = DenseMatrix::zeros(disc.n_dofs, dict.len());
    for j in 0..dict.len() {
        c_t.set_column(j, &cs.apply_transpose(&dict.d_lam.column(j).into_owned()));
    }
    let c_t_free = DenseMatrix::from_fn(disc.n_free(), dict.len(), |i, j| c_t[(disc.free[i], j)]);
    let k_mono = &k_ff * &dict.d_u + c_t_free;
    let rhs = disc.effective_load(&k, mu);

    let b = truncated_svd(&dict.d_u, delta_b)?.vectors;
    let (d, x) = with_sum_row(&b.tr_mul(&k_mono), &b.tr_mul(&rhs));
    let coeffs = nnfocuss_observed(&d, &x, DEFAULT_FOCUSS_TOL, DEFAULT_FOCUSS_MAX_ITER, observe)?;
    let alpha = normalize_simplex(coeffs.values);

    let u = disc.lift(&(&dict.d_u * &alpha), mu);
    let lam = &dict.d_lam * &alpha;
    let viol = cs.violation(&u);
    let paired = cs.paired_rows();
    let penetration = paired.iter().map(|&i| viol[i]).fold(0.0, f64::max);
    let slackness = paired.iter().map(|&i| lam[i] * viol[i]).sum::<f64>().abs();
    Ok(ConvexResult {
        convex_defect: (alpha.sum() - 1.0).abs(),
        sparsity: alpha.iter().filter(|&&a| a > 0.0).count(),
        penetration,
        slackness,
        u,
        lam,
        alpha,
        iterations: coeffs.iterations,
    })
}

/// One convex-hull query against its high-fidelity reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexRecord {
    pub mu: Vec<f64>,
    pub primal_error: Option<f64>,
    pub dual_error: Option<f64>,
    pub convex_defect: f64,
    pub penetration: f64,
    pub slackness: f64,
    pub sparsity: usize,
    /// Dictionary columns with nonzero coefficients, increasing.
    pub support: Vec<usize>,
    pub error: Option<String>,
}

/// Run [`convex_solve`] at every point and compare with the high-fidelity
/// solution there.
pub fn evaluate_convex(
    dict: &MonolithicDictionary,
    fom: &FullOrderModel,
    points: &[Vec<f64>],
    delta_b: f64,
    hf: &HfOptions,
) -> Vec<ConvexRecord> {
    let references = solve_points(fom, points, hf);
    let slave = fom.problem.contact.slave_surface().to_string();
    points
        .iter()
        .zip(references)
        .map(|(mu, reference)| {
            let mut rec = ConvexRecord {
                mu: mu.clone(),
                primal_error: None,
                dual_error: None,
                convex_defect: f64::NAN,
                penetration: f64::NAN,
                slackness: f64::NAN,
                sparsity: 0,
                support: Vec::new(),
                error: None,
            };
            match convex_solve(dict, fom, mu, delta_b) {
                Ok(res) => {
                    if let Ok((sol, _)) = &reference {
                        rec.primal_error = h1_error(&fom.problem.mesh, &res.u, &sol.u).ok();
                        rec.dual_error = l2_surface_error(&fom.problem.mesh, &slave, &res.lam, &sol.lam).ok();
                    }
                    rec.convex_defect = res.convex_defect;
                    rec.penetration = res.penetration;
                    rec.slackness = res.slackness;
                    rec.sparsity = res.sparsity;
                    rec.support = (0..res.alpha.len()).filter(|&j| res.alpha[j] > 0.0).collect();
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            if let Err(e) = reference {
                rec.error.get_or_insert_with(|| format!("reference: {e}"));
            }
            rec
        })
        .collect()
}
