use serde::{Deserialize, Serialize};

use super::{assembly, Mesh};
use crate::densela::{DenseMatrix, Vector};
use crate::{Error, Result};

/// A material coefficient that is either fixed or read from one parameter
/// component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Coefficient {
    Const(f64),
    Param(usize),
}

impl Coefficient {
    pub fn eval(&self, mu: &[f64]) -> f64 {
        match *self {
            Coefficient::Const(c) => c,
            Coefficient::Param(i) => mu[i],
        }
    }
}

/// `constant + coeffs . mu`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineValue {
    pub constant: f64,
    pub coeffs: Vec<f64>,
}

impl AffineValue {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, coeffs: Vec::new() }
    }

    /// `scale * mu[index]`
    pub fn param(index: usize, scale: f64) -> Self {
        let mut coeffs = vec![0.0; index + 1];
        coeffs[index] = scale;
        Self { constant: 0.0, coeffs }
    }

    pub fn eval(&self, mu: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().zip(mu).map(|(c, m)| c * m).sum::<f64>()
    }

    fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Constitutive {
    /// Small-strain plane strain; Young's modulus per body.
    PlaneStrain { youngs: Vec<Coefficient>, poisson: f64 },
    /// `-(a u')' = f` on bars; coefficient per body (region).
    Bar { stiffness: Vec<Coefficient> },
}

/// Imposed value of one displacement component on a node set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dirichlet {
    pub nodes: Vec<usize>,
    pub component: usize,
    pub value: AffineValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ContactSpec {
    /// Slave surface nodes against master surface segments.
    NodeToSegment { master: String, slave: String },
    /// Rigid obstacle below a 1D body: `u(x_i) >= psi_i` on the surface nodes.
    Obstacle { surface: String, psi: Vec<f64> },
}

impl ContactSpec {
    pub fn slave_surface(&self) -> &str {
        match self {
            ContactSpec::NodeToSegment { slave, .. } => slave,
            ContactSpec::Obstacle { surface, .. } => surface,
        }
    }
}

/// A parametrised linear-elastic problem with unilateral contact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticProblem {
    /// Identifier stamped into snapshot sets and models.
    pub id: String,
    pub mesh: Mesh,
    pub constitutive: Constitutive,
    pub dirichlet: Vec<Dirichlet>,
    /// Consistent nodal load over all dofs (parameter independent).
    pub nodal_load: Vec<f64>,
    pub contact: ContactSpec,
    /// Parameter box, one `(lo, hi)` per component.
    pub bounds: Vec<(f64, f64)>,
}

impl ElasticProblem {
    pub fn dofs_per_node(&self) -> usize {
        self.mesh.dim
    }

    pub fn num_dofs(&self) -> usize {
        self.mesh.num_nodes() * self.dofs_per_node()
    }

    pub fn num_params(&self) -> usize {
        self.bounds.len()
    }

    pub fn check_mu(&self, mu: &[f64]) -> Result<()> {
        let inside = mu.len() == self.bounds.len()
            && mu.iter().zip(&self.bounds).all(|(&m, &(lo, hi))| m >= lo && m <= hi);
        if inside {
            Ok(())
        } else {
            Err(Error::ParameterOutOfBox { mu: mu.to_vec(), bounds: self.bounds.clone() })
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mesh.validate()?;
        let bodies = self.mesh.num_bodies();
        match &self.constitutive {
            Constitutive::PlaneStrain { youngs, poisson } => {
                if self.mesh.dim != 2 || youngs.len() != bodies {
                    return Err(Error::InvalidArgument("plane strain needs a 2D mesh and one modulus per body".into()));
                }
                if !(0.0..0.5).contains(poisson) {
                    return Err(Error::InvalidArgument(format!("Poisson ratio {poisson} outside [0, 0.5)")));
                }
                if youngs.iter().any(|c| matches!(c, Coefficient::Const(e) if *e <= 0.0)) {
                    return Err(Error::InvalidArgument("Young's modulus must be positive".into()));
                }
            }
            Constitutive::Bar { stiffness } => {
                if self.mesh.dim != 1 || stiffness.len() != bodies {
                    return Err(Error::InvalidArgument("bar model needs a 1D mesh and one coefficient per region".into()));
                }
            }
        }
        for c in self.coefficients() {
            if let Coefficient::Param(i) = c {
                if i >= self.num_params() {
                    return Err(Error::InvalidArgument(format!("coefficient refers to parameter {i}")));
                }
            }
        }
        if self.nodal_load.len() != self.num_dofs() {
            return Err(Error::DimensionMismatch(format!(
                "nodal load has {} entries, problem has {} dofs",
                self.nodal_load.len(),
                self.num_dofs()
            )));
        }
        for bc in &self.dirichlet {
            if bc.nodes.is_empty() || bc.component >= self.dofs_per_node() {
                return Err(Error::InvalidArgument("empty or malformed Dirichlet set".into()));
            }
            if bc.nodes.iter().any(|&n| n >= self.mesh.num_nodes()) {
                return Err(Error::InvalidArgument("Dirichlet node out of range".into()));
            }
        }
        Ok(())
    }

    fn coefficients(&self) -> Vec<Coefficient> {
        match &self.constitutive {
            Constitutive::PlaneStrain { youngs, .. } => youngs.clone(),
            Constitutive::Bar { stiffness } => stiffness.clone(),
        }
    }
}

/// One affine stiffness term `theta(mu) * K_q`.
#[derive(Clone, Debug)]
pub struct StiffnessTerm {
    pub coefficient: Coefficient,
    pub matrix: DenseMatrix,
}

/// Assembled, parameter-separated operators of an [`ElasticProblem`] with
/// the free/Dirichlet dof split.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub n_dofs: usize,
    /// Free dofs, increasing.
    pub free: Vec<usize>,
    /// Dirichlet dofs, increasing.
    pub fixed: Vec<usize>,
    free_pos: Vec<Option<usize>>,
    fixed_values: Vec<AffineValue>,
    pub terms: Vec<StiffnessTerm>,
    load: Vector,
}

impl Discretization {
    pub fn new(problem: &ElasticProblem) -> Result<Self> {
        problem.validate()?;
        let n_dofs = problem.num_dofs();
        let dpn = problem.dofs_per_node();
        let mut value_of: Vec<Option<AffineValue>> = vec![None; n_dofs];
        for bc in &problem.dirichlet {
            for &node in &bc.nodes {
                value_of[node * dpn + bc.component] = Some(bc.value.clone());
            }
        }
        let mut free = Vec::new();
        let mut fixed = Vec::new();
        let mut fixed_values = Vec::new();
        let mut free_pos = vec![None; n_dofs];
        for (dof, v) in value_of.into_iter().enumerate() {
            match v {
                Some(v) => {
                    fixed.push(dof);
                    fixed_values.push(v);
                }
                None => {
                    free_pos[dof] = Some(free.len());
                    free.push(dof);
                }
            }
        }
        let terms = assembly::assemble_stiffness_terms(problem)?;
        Ok(Self {
            n_dofs,
            free,
            fixed,
            free_pos,
            fixed_values,
            terms,
            load: Vector::from_column_slice(&problem.nodal_load),
        })
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Position of `dof` among the free dofs.
    pub fn free_position(&self, dof: usize) -> Option<usize> {
        self.free_pos[dof]
    }

    /// True when no stiffness term depends on the parameter.
    pub fn stiffness_is_constant(&self) -> bool {
        self.terms.iter().all(|t| matches!(t.coefficient, Coefficient::Const(_)))
    }

    pub fn thetas(&self, mu: &[f64]) -> Vec<f64> {
        self.terms.iter().map(|t| t.coefficient.eval(mu)).collect()
    }

    /// Full stiffness `K(mu)`.
    pub fn stiffness(&self, mu: &[f64]) -> DenseMatrix {
        let mut k = DenseMatrix::zeros(self.n_dofs, self.n_dofs);
        for (t, theta) in self.terms.iter().zip(self.thetas(mu)) {
            k += &t.matrix * theta;
        }
        k
    }

    /// Imposed values on the Dirichlet dofs.
    pub fn dirichlet_values(&self, mu: &[f64]) -> Vector {
        Vector::from_iterator(self.fixed.len(), self.fixed_values.iter().map(|v| v.eval(mu)))
    }

    /// Imposed values split as `d_0 + sum_i mu_i d_i`; column `0` is the
    /// constant part.
    pub fn dirichlet_affine(&self, n_params: usize) -> DenseMatrix {
        DenseMatrix::from_fn(self.fixed.len(), n_params + 1, |r, c| {
            let v = &self.fixed_values[r];
            if c == 0 {
                v.constant
            } else {
                v.coeff(c - 1)
            }
        })
    }

    pub fn load(&self) -> &Vector {
        &self.load
    }

    /// Free-dof load with the imposed displacements moved to the right hand
    /// side: `f_f - K_fd u_d`.
    pub fn effective_load(&self, k: &DenseMatrix, mu: &[f64]) -> Vector {
        let ud = self.dirichlet_values(mu);
        let mut f = self.restrict(&self.load);
        for (i, &r) in self.free.iter().enumerate() {
            let mut s = 0.0;
            for (j, &c) in self.fixed.iter().enumerate() {
                s += k[(r, c)] * ud[j];
            }
            f[i] -= s;
        }
        f
    }

    /// Free-dof part of a full vector.
    pub fn restrict(&self, u: &Vector) -> Vector {
        Vector::from_iterator(self.free.len(), self.free.iter().map(|&d| u[d]))
    }

    /// Full vector from free values and the imposed displacements at `mu`.
    pub fn lift(&self, u_free: &Vector, mu: &[f64]) -> Vector {
        let mut u = Vector::zeros(self.n_dofs);
        for (i, &d) in self.free.iter().enumerate() {
            u[d] = u_free[i];
        }
        for (&d, v) in self.fixed.iter().zip(self.dirichlet_values(mu).iter()) {
            u[d] = *v;
        }
        u
    }

    /// Submatrix of a full matrix on (free rows, given columns).
    pub fn free_rows(&self, k: &DenseMatrix, cols: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(self.free.len(), cols.len(), |i, j| k[(self.free[i], cols[j])])
    }
}
