use nalgebra::{SMatrix, SVector};

use super::problem::{Coefficient, Constitutive, ElasticProblem, StiffnessTerm};
use super::Mesh;
use crate::densela::{DenseMatrix, Vector};
use crate::{Error, Result};

pub type QuadMatrix = SMatrix<f64, 8, 8>;

const CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// Gauss-Legendre points and weights on `[-1, 1]`.
pub fn gauss_rule(order: usize) -> (Vec<f64>, Vec<f64>) {
    match order {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (0.6f64).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        _ => panic!("unsupported Gauss order {order}"),
    }
}

/// Bilinear shape functions and their reference derivatives at `(xi, eta)`.
pub fn shape(xi: f64, eta: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    let mut n = [0.0; 4];
    let mut dn = [[0.0; 2]; 4];
    for (k, c) in CORNERS.iter().enumerate() {
        n[k] = 0.25 * (1.0 + c[0] * xi) * (1.0 + c[1] * eta);
        dn[k] = [0.25 * c[0] * (1.0 + c[1] * eta), 0.25 * c[1] * (1.0 + c[0] * xi)];
    }
    (n, dn)
}

/// Physical shape gradients and Jacobian determinant at a reference point.
pub fn physical_gradients(x: &[[f64; 2]; 4], xi: f64, eta: f64) -> ([f64; 4], [[f64; 2]; 4], f64) {
    let (n, dn) = shape(xi, eta);
    let mut j = [[0.0; 2]; 2];
    for k in 0..4 {
        for a in 0..2 {
            for b in 0..2 {
                j[a][b] += x[k][a] * dn[k][b];
            }
        }
    }
    // j[a][b] = d x_a / d xi_b
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
    let mut grad = [[0.0; 2]; 4];
    for k in 0..4 {
        for a in 0..2 {
            grad[k][a] = dn[k][0] * inv[0][a] + dn[k][1] * inv[1][a];
        }
    }
    (n, grad, det)
}

pub fn plane_strain_matrix(youngs: f64, poisson: f64) -> SMatrix<f64, 3, 3> {
    let c = youngs / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    SMatrix::<f64, 3, 3>::new(
        c * (1.0 - poisson),
        c * poisson,
        0.0,
        c * poisson,
        c * (1.0 - poisson),
        0.0,
        0.0,
        0.0,
        c * (1.0 - 2.0 * poisson) / 2.0,
    )
}

fn symmetrize(m: &mut QuadMatrix) {
    for i in 0..8 {
        for j in 0..i {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
}

/// Plane-strain stiffness of one bilinear quad, 2x2 Gauss. Dofs are ordered
/// `(x0, y0, x1, y1, ...)`.
pub fn quad_stiffness(x: &[[f64; 2]; 4], youngs: f64, poisson: f64, element: usize) -> Result<QuadMatrix> {
    let d = plane_strain_matrix(youngs, poisson);
    let (pts, wts) = gauss_rule(2);
    let mut ke = QuadMatrix::zeros();
    for (&xi, &wx) in pts.iter().zip(&wts) {
        for (&eta, &wy) in pts.iter().zip(&wts) {
            let (_, g, det) = physical_gradients(x, xi, eta);
            if det <= 0.0 || !det.is_finite() {
                return Err(Error::InvertedElement { element });
            }
            let mut b = SMatrix::<f64, 3, 8>::zeros();
            for k in 0..4 {
                b[(0, 2 * k)] = g[k][0];
                b[(1, 2 * k + 1)] = g[k][1];
                b[(2, 2 * k)] = g[k][1];
                b[(2, 2 * k + 1)] = g[k][0];
            }
            ke += b.transpose() * d * b * (det * wx * wy);
        }
    }
    symmetrize(&mut ke);
    Ok(ke)
}

/// Vector Laplacian plus consistent mass of one quad, `order x order` Gauss.
pub fn quad_h1(x: &[[f64; 2]; 4], order: usize) -> QuadMatrix {
    let (pts, wts) = gauss_rule(order);
    let mut m = QuadMatrix::zeros();
    for (&xi, &wx) in pts.iter().zip(&wts) {
        for (&eta, &wy) in pts.iter().zip(&wts) {
            let (n, g, det) = physical_gradients(x, xi, eta);
            let w = det * wx * wy;
            for a in 0..4 {
                for b in 0..4 {
                    let v = w * (n[a] * n[b] + g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    m[(2 * a, 2 * b)] += v;
                    m[(2 * a + 1, 2 * b + 1)] += v;
                }
            }
        }
    }
    symmetrize(&mut m);
    m
}

/// Bar stiffness `a / h [[1, -1], [-1, 1]]`.
pub fn bar_stiffness(h: f64, a: f64) -> [[f64; 2]; 2] {
    let k = a / h;
    [[k, -k], [-k, k]]
}

/// `int u'v' + uv` on a linear bar.
pub fn bar_h1(h: f64) -> [[f64; 2]; 2] {
    let (k, m) = (1.0 / h, h / 6.0);
    [[k + 2.0 * m, -k + m], [-k + m, k + 2.0 * m]]
}

pub(crate) fn element_coords(mesh: &Mesh, conn: &[usize]) -> [[f64; 2]; 4] {
    [mesh.nodes[conn[0]], mesh.nodes[conn[1]], mesh.nodes[conn[2]], mesh.nodes[conn[3]]]
}

/// Stiffness split into parameter-separable terms: elements whose
/// coefficient is identical share one term, assembled with unit coefficient.
pub fn assemble_stiffness_terms(problem: &ElasticProblem) -> Result<Vec<StiffnessTerm>> {
    problem.mesh.validate()?;
    let mesh = &problem.mesh;
    let n = problem.num_dofs();
    let per_body: &[Coefficient] = match &problem.constitutive {
        Constitutive::PlaneStrain { youngs, .. } => youngs,
        Constitutive::Bar { stiffness } => stiffness,
    };
    let mut distinct: Vec<Coefficient> = Vec::new();
    for c in per_body {
        if !distinct.contains(c) {
            distinct.push(*c);
        }
    }
    let mut terms: Vec<StiffnessTerm> =
        distinct.iter().map(|&c| StiffnessTerm { coefficient: c, matrix: DenseMatrix::zeros(n, n) }).collect();

    for (e, conn) in mesh.elements.iter().enumerate() {
        let coeff = per_body[mesh.element_body[e]];
        let q = distinct.iter().position(|c| *c == coeff).unwrap();
        let k = &mut terms[q].matrix;
        match &problem.constitutive {
            Constitutive::PlaneStrain { poisson, .. } => {
                // unit modulus; the term coefficient scales it
                let ke = quad_stiffness(&element_coords(mesh, conn), 1.0, *poisson, e)?;
                scatter_quad(k, conn, &ke);
            }
            Constitutive::Bar { .. } => {
                let h = mesh.distance(conn[0], conn[1]);
                let ke = bar_stiffness(h, 1.0);
                for a in 0..2 {
                    for b in 0..2 {
                        k[(conn[a], conn[b])] += ke[a][b];
                    }
                }
            }
        }
    }
    // constant terms with equal value collapse into a single unit term
    for t in &mut terms {
        if let Coefficient::Const(c) = t.coefficient {
            t.matrix *= c;
            t.coefficient = Coefficient::Const(1.0);
        }
    }
    let mut merged: Vec<StiffnessTerm> = Vec::new();
    for t in terms {
        match merged.iter_mut().find(|m| m.coefficient == t.coefficient) {
            Some(m) => m.matrix += t.matrix,
            None => merged.push(t),
        }
    }
    Ok(merged)
}

pub(crate) fn scatter_quad(k: &mut DenseMatrix, conn: &[usize], ke: &QuadMatrix) {
    for a in 0..4 {
        for ca in 0..2 {
            let r = 2 * conn[a] + ca;
            for b in 0..4 {
                for cb in 0..2 {
                    k[(r, 2 * conn[b] + cb)] += ke[(2 * a + ca, 2 * b + cb)];
                }
            }
        }
    }
}

/// Full stiffness `K(mu)`, block diagonal over bodies.
pub fn assemble_stiffness(problem: &ElasticProblem, mu: &[f64]) -> Result<DenseMatrix> {
    problem.validate()?;
    let n = problem.num_dofs();
    let mut k = DenseMatrix::zeros(n, n);
    for t in assemble_stiffness_terms(problem)? {
        k += &t.matrix * t.coefficient.eval(mu);
    }
    Ok(k)
}

/// Load vector and the imposed `(dof, value)` pairs at `mu`.
pub fn assemble_load_and_bc(problem: &ElasticProblem, mu: &[f64]) -> Result<(Vector, Vec<(usize, f64)>)> {
    problem.validate()?;
    problem.check_mu(mu)?;
    let dpn = problem.dofs_per_node();
    let mut constrained = std::collections::BTreeMap::new();
    for bc in &problem.dirichlet {
        let v = bc.value.eval(mu);
        for &node in &bc.nodes {
            constrained.insert(node * dpn + bc.component, v);
        }
    }
    Ok((Vector::from_column_slice(&problem.nodal_load), constrained.into_iter().collect()))
}

/// Stress `[s_xx, s_yy, s_xy]` at a reference point of a quad.
pub fn quad_stress(x: &[[f64; 2]; 4], ue: &SVector<f64, 8>, youngs: f64, poisson: f64, xi: f64, eta: f64) -> [f64; 3] {
    let (_, g, _) = physical_gradients(x, xi, eta);
    let mut strain = [0.0; 3];
    for k in 0..4 {
        strain[0] += g[k][0] * ue[2 * k];
        strain[1] += g[k][1] * ue[2 * k + 1];
        strain[2] += g[k][1] * ue[2 * k] + g[k][0] * ue[2 * k + 1];
    }
    let d = plane_strain_matrix(youngs, poisson);
    let s = d * SVector::<f64, 3>::from(strain);
    [s[0], s[1], s[2]]
}
