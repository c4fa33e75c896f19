use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::pairing::{detect_pairs, detect_pairs_holding, ContactSystem, Pairing};
use crate::densela::{lstsq, nonneg_qp, DenseMatrix, ProfileCholesky, Vector};
use crate::fem::{Discretization, ElasticProblem};
use crate::{Error, Result};

pub const DEFAULT_HF_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_OUTER: usize = 30;
const ANDERSON_DEPTH: usize = 5;

/// Max-norm violations of equilibrium, non-penetration, multiplier sign and
/// complementarity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub equilibrium: f64,
    pub penetration: f64,
    pub negativity: f64,
    pub slackness: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.equilibrium.max(self.penetration).max(self.negativity).max(self.slackness)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HfOptions {
    pub tol: f64,
    pub max_outer: usize,
}

impl Default for HfOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_HF_TOL, max_outer: DEFAULT_MAX_OUTER }
    }
}

#[derive(Clone, Debug)]
pub struct HfSolution {
    pub mu: Vec<f64>,
    /// Full displacement, Dirichlet values included.
    pub u: Vector,
    /// Nodal multipliers on the slave surface, polyline order.
    pub lam: Vector,
    /// Slave indices carrying positive pressure.
    pub active_set: Vec<usize>,
    pub iterations: usize,
    /// Residuals relative to the problem scales (see
    /// [`FullOrderModel::kkt_relative`]).
    pub residuals: KktResiduals,
    pub contact: ContactSystem,
}

#[derive(Clone)]
struct Factored {
    k: DenseMatrix,
    chol: ProfileCholesky,
}

/// Assembled problem with a cached free-dof factorization when the
/// stiffness does not depend on the parameter.
pub struct FullOrderModel {
    pub problem: ElasticProblem,
    pub disc: Discretization,
    cached: Option<Factored>,
}

impl FullOrderModel {
    pub fn new(problem: ElasticProblem) -> Result<Self> {
        let disc = Discretization::new(&problem)?;
        let mut fom = Self { problem, disc, cached: None };
        if fom.disc.stiffness_is_constant() {
            let k = fom.disc.stiffness(&[]);
            let chol = ProfileCholesky::factor_submatrix(&k, &fom.disc.free)?;
            fom.cached = Some(Factored { k, chol });
        }
        Ok(fom)
    }

    fn factored(&self, mu: &[f64]) -> Result<Cow<'_, Factored>> {
        match &self.cached {
            Some(f) => Ok(Cow::Borrowed(f)),
            None => {
                let k = self.disc.stiffness(mu);
                let chol = ProfileCholesky::factor_submatrix(&k, &self.disc.free)?;
                Ok(Cow::Owned(Factored { k, chol }))
            }
        }
    }

    /// Full stiffness at `mu` (borrowed when cached).
    pub fn stiffness(&self, mu: &[f64]) -> Cow<'_, DenseMatrix> {
        match &self.cached {
            Some(f) => Cow::Borrowed(&f.k),
            None => Cow::Owned(self.disc.stiffness(mu)),
        }
    }

    pub fn num_duals(&self) -> usize {
        self.problem.mesh.surface_nodes(self.problem.contact.slave_surface()).map_or(0, |n| n.len())
    }

    pub fn detect_pairs(&self, u: &Vector) -> Result<ContactSystem> {
        detect_pairs(&self.problem, u)
    }

    /// Solve the contact problem at `mu` by an outer pairing loop around an
    /// exact active-set solve of the dual quadratic program.
    pub fn solve(&self, mu: &[f64], opts: &HfOptions) -> Result<HfSolution> {
        self.problem.check_mu(mu)?;
        let fac = self.factored(mu)?;
        let disc = &self.disc;
        let f_eff = disc.effective_load(&fac.k, mu);
        let u0 = fac.chol.solve(&f_eff);
        let ud = disc.dirichlet_values(mu);

        // Fixed point x -> G(x): detect pairs at x, solve the frozen-pairing
        // problem. Anderson mixing accelerates the slow tangential drift of
        // the projections once the pairing has settled.
        let mut x = u0.clone();
        let mut cs = self.detect_pairs(&disc.lift(&x, mu))?;
        // nodes that keep dropping off a master end are held paired to it
        let mut drops = vec![0usize; cs.num_duals()];
        let mut held = vec![false; cs.num_duals()];
        let mut lam = Vector::zeros(cs.num_duals());
        let mut u_prev = disc.lift(&x, mu);
        let mut history: Vec<(Vector, Vector)> = Vec::new();
        let mut last: Option<(Vector, Vector, Vec<usize>)> = None;
        for it in 1..=opts.max_outer {
            let rows = cs.paired_rows();
            let (cf, g_eff) = self.free_constraints(&cs, &rows, &ud);
            let z = fac.chol.solve_matrix(&cf.transpose());
            let s = &cf * &z;
            let b = &cf * &u0 - &g_eff;
            let lp = nonneg_qp(&s, &b);
            let gx = &u0 - &z * &lp;
            lam.fill(0.0);
            for (k, &r) in rows.iter().enumerate() {
                lam[r] = lp[k];
            }
            let u = disc.lift(&gx, mu);
            let next = detect_pairs_holding(&self.problem, &u, &held)?;
            let resid = &gx - &x;
            let changed = next.pairs.iter().zip(&cs.pairs).filter(|(a, b)| a.key() != b.key()).count();
            let rel = resid.norm() / gx.norm().max(f64::MIN_POSITIVE);
            log::debug!("outer {it}: {changed} pairing changes, |G(x) - x|/|G(x)| = {rel:.3e}");
            u_prev = u;
            let settled = changed == 0 && resid.norm() <= opts.tol * gx.norm();
            let residuals = if settled { Some(self.kkt_relative_with(&next, mu, &u_prev, &lam)?) } else { None };
            if let Some(residuals) = residuals.filter(|r| r.max() <= opts.tol) {
                let active_set = (0..lam.len()).filter(|&i| lam[i] > 0.0).collect();
                return Ok(HfSolution {
                    mu: mu.to_vec(),
                    u: u_prev,
                    lam,
                    active_set,
                    iterations: it,
                    residuals,
                    contact: next,
                });
            }
            let active: Vec<usize> = (0..lam.len()).filter(|&i| lam[i] > 0.0).collect();
            let mut newly_held = false;
            for i in 0..drops.len() {
                if cs.pairs[i].is_paired() && next.pairs[i] == Pairing::Unpaired {
                    drops[i] += 1;
                    if drops[i] >= 2 && !held[i] {
                        held[i] = true;
                        newly_held = true;
                    }
                }
            }
            match &last {
                Some((pr, pg, pa)) if changed == 0 && !newly_held && *pa == active => {
                    history.push((&resid - pr, &gx - pg));
                    if history.len() > ANDERSON_DEPTH {
                        history.remove(0);
                    }
                }
                _ => history.clear(),
            }
            x = gx.clone();
            if !history.is_empty() {
                let dr = DenseMatrix::from_columns(&history.iter().map(|h| h.0.clone()).collect::<Vec<_>>());
                match lstsq(&dr, &resid) {
                    Ok(gamma) => {
                        for (k, (_, dg)) in history.iter().enumerate() {
                            x -= dg * gamma[k];
                        }
                    }
                    Err(_) => history.clear(),
                }
            }
            last = Some((resid, gx, active));
            cs = detect_pairs_holding(&self.problem, &disc.lift(&x, mu), &held)?;
        }
        let residuals = self.kkt_relative_with(&cs, mu, &u_prev, &lam)?;
        Err(Error::HfNotConverged {
            mu: mu.to_vec(),
            iterations: opts.max_outer,
            residuals,
            last_u: u_prev.as_slice().to_vec(),
            last_lam: lam.as_slice().to_vec(),
        })
    }

    /// Constraint rows restricted to free dofs, with the imposed part moved
    /// into the gap: `C_f u_f - (g - C_d u_d)`.
    fn free_constraints(&self, cs: &ContactSystem, rows: &[usize], ud: &Vector) -> (DenseMatrix, Vector) {
        let disc = &self.disc;
        let mut cf = DenseMatrix::zeros(rows.len(), disc.n_free());
        let mut g = Vector::zeros(rows.len());
        let mut fixed_pos = std::collections::HashMap::new();
        for (j, &d) in disc.fixed.iter().enumerate() {
            fixed_pos.insert(d, j);
        }
        for (k, &r) in rows.iter().enumerate() {
            g[k] = cs.g[r];
            for &(d, v) in &cs.rows[r] {
                match disc.free_position(d) {
                    Some(p) => cf[(k, p)] += v,
                    None => g[k] -= v * ud[fixed_pos[&d]],
                }
            }
        }
        (cf, g)
    }

    /// Raw max-norm KKT violations at `(u, lam)`; pairs are detected at `u`.
    pub fn kkt_residuals(&self, mu: &[f64], u: &Vector, lam: &Vector) -> Result<KktResiduals> {
        self.kkt_residuals_with(&self.detect_pairs(u)?, mu, u, lam)
    }

    /// Raw KKT violations against a given contact linearisation.
    pub fn kkt_residuals_with(&self, cs: &ContactSystem, mu: &[f64], u: &Vector, lam: &Vector) -> Result<KktResiduals> {
        if lam.len() != cs.num_duals() {
            return Err(Error::DimensionMismatch(format!("multiplier has {} entries, expected {}", lam.len(), cs.num_duals())));
        }
        let k = self.stiffness(mu);
        let r = &*k * u - self.disc.load() + cs.apply_transpose(lam);
        let equilibrium = self.disc.free.iter().map(|&d| r[d].abs()).fold(0.0, f64::max);
        let viol = cs.violation(u);
        let mut penetration: f64 = 0.0;
        let mut slackness: f64 = 0.0;
        for i in 0..cs.num_duals() {
            if cs.pairs[i].is_paired() {
                penetration = penetration.max(viol[i]);
                slackness = slackness.max((lam[i] * viol[i]).abs());
            } else if lam[i] != 0.0 {
                slackness = f64::INFINITY;
            }
        }
        let negativity = lam.iter().fold(0.0f64, |m, &l| m.max(-l));
        Ok(KktResiduals { equilibrium, penetration, negativity, slackness })
    }

    /// KKT residuals scaled to be dimensionless: equilibrium by the
    /// effective load, penetration by the displacement, negativity by the
    /// multiplier and slackness by their product (max norms; zero scales are
    /// left unscaled).
    pub fn kkt_relative(&self, mu: &[f64], u: &Vector, lam: &Vector) -> Result<KktResiduals> {
        self.kkt_relative_with(&self.detect_pairs(u)?, mu, u, lam)
    }

    pub fn kkt_relative_with(&self, cs: &ContactSystem, mu: &[f64], u: &Vector, lam: &Vector) -> Result<KktResiduals> {
        let raw = self.kkt_residuals_with(cs, mu, u, lam)?;
        let k = self.stiffness(mu);
        let f_scale = self.disc.effective_load(&k, mu).amax();
        let u_scale = u.amax();
        let l_scale = lam.amax();
        let rel = |v: f64, s: f64| if s > 0.0 { v / s } else { v };
        Ok(KktResiduals {
            equilibrium: rel(raw.equilibrium, f_scale),
            penetration: rel(raw.penetration, u_scale),
            negativity: rel(raw.negativity, l_scale),
            slackness: rel(raw.slackness, l_scale * u_scale),
        })
    }
}

/// One-shot high-fidelity solve.
pub fn solve_hf(problem: &ElasticProblem, mu: &[f64], tol: f64, max_outer: usize) -> Result<HfSolution> {
    FullOrderModel::new(problem.clone())?.solve(mu, &HfOptions { tol, max_outer })
}

/// Raw KKT residuals for a one-off check.
pub fn kkt_residuals(problem: &ElasticProblem, mu: &[f64], u: &Vector, lam: &Vector) -> Result<KktResiduals> {
    FullOrderModel::new(problem.clone())?.kkt_residuals(mu, u, lam)
}
