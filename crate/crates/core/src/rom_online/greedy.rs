use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::contact::{ContactSystem, FullOrderModel};
use crate::densela::{solve_saddle, DenseMatrix, Vector};
use crate::rom_offline::ReducedModel;
use crate::{Error, Result};

pub const DEFAULT_K_MAX: usize = 50;
pub const DEFAULT_CONV_TOL: f64 = 1e-5;

/// Displacement at which the contact pairs of the first iteration are
/// detected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPairing {
    /// Undeformed configuration.
    #[default]
    Reference,
    /// Unconstrained reduced solution.
    Unconstrained,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyOptions {
    pub k_max: usize,
    pub conv_tol: f64,
    /// Permitted projected penetration; `None` takes the model's `tau`.
    pub tau: Option<f64>,
    pub initial: InitialPairing,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self { k_max: DEFAULT_K_MAX, conv_tol: DEFAULT_CONV_TOL, tau: None, initial: InitialPairing::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyStatus {
    Converged,
    /// `k_max` iterations without convergence.
    MaxIterations,
    /// The same enrichment/elimination pair repeated; stopped early.
    Oscillation,
}

/// Iterate of the greedy solver.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyState {
    pub u_hat: Vector,
    /// One coefficient per dictionary column; zero off the active set.
    pub lam_hat: Vector,
    /// Active dictionary columns in insertion order.
    pub active: Vec<usize>,
    pub k: usize,
    pub k_max: usize,
    pub conv_tol: f64,
}

#[derive(Clone, Debug)]
pub struct OnlineResult {
    pub mu: Vec<f64>,
    /// Full displacement, Dirichlet values included.
    pub u: Vector,
    /// Multipliers on the slave nodes, `D_lam lam_hat`.
    pub lam: Vector,
    pub state: GreedyState,
    pub status: GreedyStatus,
    /// Columns dropped because the active constraints became dependent.
    pub dependent_removals: Vec<usize>,
    /// Reduced constraints of the last iteration; `None` when `k_max = 0`.
    pub constraints: Option<ReducedConstraints>,
    pub wall_time: f64,
    pub per_iter_time: f64,
}

impl OnlineResult {
    pub fn converged(&self) -> bool {
        self.status == GreedyStatus::Converged
    }

    pub fn iterations(&self) -> usize {
        self.state.k
    }
}

/// Projected constraints `C_hat u_hat - g_hat <= tau` with
/// `C_hat = D^T C_f Phi` and `g_hat = D^T (g - C_d u_d)`. Rows of unpaired
/// slave nodes do not contribute.
#[derive(Clone, Debug)]
pub struct ReducedConstraints {
    pub c_hat: DenseMatrix,
    pub g_hat: Vector,
    pub contact: ContactSystem,
}

/// A reduced model bound to the full-order problem it was built for.
pub struct OnlineSolver<'a> {
    pub model: &'a ReducedModel,
    pub fom: &'a FullOrderModel,
    fixed_pos: Vec<Option<usize>>,
}

impl<'a> OnlineSolver<'a> {
    pub fn new(model: &'a ReducedModel, fom: &'a FullOrderModel) -> Result<Self> {
        if model.problem_id != fom.problem.id {
            return Err(Error::ProblemMismatch { model: model.problem_id.clone(), query: fom.problem.id.clone() });
        }
        if model.phi.vectors.nrows() != fom.disc.n_free() || model.dual_dict.nrows() != fom.num_duals() {
            return Err(Error::DimensionMismatch("model does not fit the problem discretization".into()));
        }
        let mut fixed_pos = vec![None; fom.disc.n_dofs];
        for (j, &d) in fom.disc.fixed.iter().enumerate() {
            fixed_pos[d] = Some(j);
        }
        Ok(Self { model, fom, fixed_pos })
    }

    /// Full displacement `lift(Phi u_hat)` at `mu`.
    pub fn reconstruct(&self, u_hat: &Vector, mu: &[f64]) -> Vector {
        self.fom.disc.lift(&(&self.model.phi.vectors * u_hat), mu)
    }

    /// Detect pairs at `u_current` (full displacement) and project the
    /// constraints onto the primal basis and the dual dictionary.
    pub fn reduce_constraints(&self, mu: &[f64], u_current: &Vector) -> Result<ReducedConstraints> {
        let cs = self.fom.detect_pairs(u_current)?;
        let phi = &self.model.phi.vectors;
        let ud = self.fom.disc.dirichlet_values(mu);
        let m = cs.num_duals();
        let mut c_phi = DenseMatrix::zeros(m, phi.ncols());
        let mut g = Vector::zeros(m);
        for i in cs.paired_rows() {
            g[i] = cs.g[i];
            for &(d, v) in &cs.rows[i] {
                match self.fom.disc.free_position(d) {
                    Some(p) => {
                        for c in 0..phi.ncols() {
                            c_phi[(i, c)] += v * phi[(p, c)];
                        }
                    }
                    None => g[i] -= v * ud[self.fixed_pos[d].expect("dof is free or fixed")],
                }
            }
        }
        let dict = &self.model.dual_dict;
        Ok(ReducedConstraints { c_hat: dict.tr_mul(&c_phi), g_hat: dict.tr_mul(&g), contact: cs })
    }

    /// Greedy active-set solve at `mu`.
    pub fn solve(&self, mu: &[f64], opts: &GreedyOptions) -> Result<OnlineResult> {
        let start = Instant::now();
        self.fom.problem.check_mu(mu)?;
        let model = self.model;
        let tau = opts.tau.unwrap_or(model.tau);
        let kr = model.kr(mu);
        let fr = model.fr(mu);
        let n_dict = model.dict_size();
        let unconstrained = solve_saddle(&kr, &DenseMatrix::zeros(0, kr.ncols()), &fr, &Vector::zeros(0))?.0;

        let mut u_hat_prev = match opts.initial {
            InitialPairing::Reference => Vector::zeros(model.rank()),
            InitialPairing::Unconstrained => unconstrained.clone(),
        };
        let mut u_current = match opts.initial {
            InitialPairing::Reference => Vector::zeros(self.fom.disc.n_dofs),
            InitialPairing::Unconstrained => self.reconstruct(&unconstrained, mu),
        };
        let mut active: Vec<usize> = Vec::new();
        let mut events: Vec<(bool, usize)> = Vec::new();
        // columns dropped for dependence are not offered again
        let mut excluded: Vec<usize> = Vec::new();
        let mut status = GreedyStatus::MaxIterations;
        let mut u_hat = u_hat_prev.clone();
        let mut lam_hat = Vector::zeros(n_dict);
        let mut k = 0;
        let mut last_rc = None;
        while k < opts.k_max {
            k += 1;
            let rc = last_rc.insert(self.reduce_constraints(mu, &u_current)?);
            let (u_new, lam_active) = loop {
                let c_act = rc.c_hat.select_rows(active.iter());
                let g_act = rc.g_hat.select_rows(active.iter());
                match solve_saddle(&kr, &c_act, &fr, &g_act) {
                    Ok(sol) => break sol,
                    Err(Error::DependentConstraints) if !active.is_empty() => {
                        let dropped = active.pop().unwrap();
                        excluded.push(dropped);
                        log::debug!("column {dropped} made the active constraints dependent; removed");
                    }
                    Err(e) => return Err(e),
                }
            };
            u_hat = u_new;
            lam_hat.fill(0.0);
            for (a, &j) in active.iter().enumerate() {
                lam_hat[j] = lam_active[a];
            }

            let change = (&u_hat - &u_hat_prev).norm();
            let scale = u_hat.norm();
            let stable = change <= opts.conv_tol * scale || (change == 0.0 && scale == 0.0);
            let mut event = None;
            // most negative coefficient; lowest dictionary index on ties
            let mut rem: Option<usize> = None;
            for a in 0..active.len() {
                let l = lam_active[a];
                if l < 0.0
                    && rem.is_none_or(|b| l < lam_active[b] || (l == lam_active[b] && active[a] < active[b]))
                {
                    rem = Some(a);
                }
            }
            if let Some(a) = rem {
                let p_rem = active.remove(a);
                event = Some((false, p_rem));
            } else {
                let v = &rc.c_hat * &u_hat - &rc.g_hat;
                let mut best: Option<(usize, f64)> = None;
                for j in 0..n_dict {
                    if v[j] > tau && !active.contains(&j) && !excluded.contains(&j) && best.is_none_or(|(_, b)| v[j] > b) {
                        best = Some((j, v[j]));
                    }
                }
                if let Some((p_add, _)) = best {
                    active.push(p_add);
                    event = Some((true, p_add));
                }
            }
            log::trace!("greedy k={k}: event {event:?}, |I| = {}, du/u = {:.3e}", active.len(), change / scale.max(f64::MIN_POSITIVE));
            u_current = self.reconstruct(&u_hat, mu);
            u_hat_prev = u_hat.clone();
            match event {
                None if stable => {
                    status = GreedyStatus::Converged;
                    break;
                }
                None => {}
                Some(e) => {
                    events.push(e);
                    let n = events.len();
                    if n >= 4 && events[n - 1] == events[n - 3] && events[n - 2] == events[n - 4] {
                        status = GreedyStatus::Oscillation;
                        break;
                    }
                }
            }
        }
        let lam = &model.dual_dict * &lam_hat;
        let wall_time = start.elapsed().as_secs_f64();
        Ok(OnlineResult {
            mu: mu.to_vec(),
            u: u_current,
            lam,
            state: GreedyState { u_hat, lam_hat, active, k, k_max: opts.k_max, conv_tol: opts.conv_tol },
            status,
            dependent_removals: excluded,
            constraints: last_rc,
            wall_time,
            per_iter_time: wall_time / k.max(1) as f64,
        })
    }
}

/// One-shot greedy solve; see [`OnlineSolver::solve`].
pub fn greedy_active_set(
    model: &ReducedModel,
    fom: &FullOrderModel,
    mu: &[f64],
    opts: &GreedyOptions,
) -> Result<OnlineResult> {
    OnlineSolver::new(model, fom)?.solve(mu, opts)
}

/// See [`OnlineSolver::reduce_constraints`].
pub fn reduce_constraints(
    model: &ReducedModel,
    fom: &FullOrderModel,
    mu: &[f64],
    u_current: &Vector,
) -> Result<ReducedConstraints> {
    OnlineSolver::new(model, fom)?.reduce_constraints(mu, u_current)
}
