use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::densela::{DenseMatrix, Vector};
use crate::fem::{ContactSpec, ElasticProblem, Mesh};
use crate::{Error, Result};

/// Reach beyond the end vertices of the master polyline, as a fraction of
/// the end segment length, within which a slave node still pairs with the
/// end segment (at the clamped vertex).
pub const END_EXTENSION: f64 = 1.0;

/// How one slave node is constrained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Pairing {
    /// Projected onto master segment `segment` (index along the master
    /// polyline) at coordinate `xi`, with outward master normal.
    Segment { segment: usize, xi: f64, normal: [f64; 2] },
    /// Against the rigid obstacle.
    Obstacle,
    /// Closest master point is a polyline end with the projection outside:
    /// no constraint.
    Unpaired,
}

impl Pairing {
    pub fn is_paired(&self) -> bool {
        !matches!(self, Pairing::Unpaired)
    }

    /// Discrete identity of a pairing (segment and paired status, not `xi`).
    pub fn key(&self) -> Option<usize> {
        match *self {
            Pairing::Segment { segment, .. } => Some(segment),
            Pairing::Obstacle => Some(usize::MAX),
            Pairing::Unpaired => None,
        }
    }
}

/// Linearised non-penetration constraints `C u - g <= 0`, one row per slave
/// node. `C u - g` is minus the normal gap. Unpaired rows are empty with
/// `g = +inf`.
#[derive(Clone, Debug)]
pub struct ContactSystem {
    pub n_dofs: usize,
    pub slave_nodes: Vec<usize>,
    pub pairs: Vec<Pairing>,
    /// Sparse rows as `(dof, coefficient)`.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub g: Vector,
    /// Nodal quadrature weights of the dual dofs.
    pub weights: Vec<f64>,
}

impl ContactSystem {
    pub fn num_duals(&self) -> usize {
        self.slave_nodes.len()
    }

    pub fn paired_rows(&self) -> Vec<usize> {
        (0..self.num_duals()).filter(|&i| self.pairs[i].is_paired()).collect()
    }

    pub fn dense_c(&self) -> DenseMatrix {
        let mut c = DenseMatrix::zeros(self.num_duals(), self.n_dofs);
        for (i, row) in self.rows.iter().enumerate() {
            for &(d, v) in row {
                c[(i, d)] += v;
            }
        }
        c
    }

    pub fn apply(&self, u: &Vector) -> Vector {
        Vector::from_iterator(self.num_duals(), self.rows.iter().map(|row| row.iter().map(|&(d, v)| v * u[d]).sum()))
    }

    /// `C^T lam`
    pub fn apply_transpose(&self, lam: &Vector) -> Vector {
        let mut out = Vector::zeros(self.n_dofs);
        for (row, &l) in self.rows.iter().zip(lam.iter()) {
            for &(d, v) in row {
                out[d] += v * l;
            }
        }
        out
    }

    /// `C u - g` on paired rows, `-inf` on unpaired rows.
    pub fn violation(&self, u: &Vector) -> Vector {
        let cu = self.apply(u);
        Vector::from_fn(self.num_duals(), |i, _| {
            if self.pairs[i].is_paired() {
                cu[i] - self.g[i]
            } else {
                f64::NEG_INFINITY
            }
        })
    }

    /// `C` times a matrix with one column per dof-space vector.
    pub fn mul_matrix(&self, m: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.num_duals(), m.ncols());
        for (i, row) in self.rows.iter().enumerate() {
            for &(d, v) in row {
                for j in 0..m.ncols() {
                    out[(i, j)] += v * m[(d, j)];
                }
            }
        }
        out
    }

    pub fn same_pairing(&self, other: &ContactSystem) -> bool {
        self.pairs.len() == other.pairs.len() && self.pairs.iter().zip(&other.pairs).all(|(a, b)| a.key() == b.key())
    }
}

/// Pair every slave node with its closest master segment in the deformed
/// configuration `X + u` and linearise the normal gap there.
pub fn detect_pairs(problem: &ElasticProblem, u: &Vector) -> Result<ContactSystem> {
    detect_pairs_holding(problem, u, &[])
}

/// As [`detect_pairs`], but slave nodes flagged in `held` stay paired with
/// an end segment however far outside it they project.
pub fn detect_pairs_holding(problem: &ElasticProblem, u: &Vector, held: &[bool]) -> Result<ContactSystem> {
    let n_dofs = problem.num_dofs();
    if u.len() != n_dofs {
        return Err(Error::DimensionMismatch(format!("displacement has {} entries, expected {n_dofs}", u.len())));
    }
    let mesh = &problem.mesh;
    let slave_name = problem.contact.slave_surface();
    let (slave_nodes, weights) = mesh
        .surface_weights(slave_name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown slave surface {slave_name}")))?;
    let m = slave_nodes.len();

    match &problem.contact {
        ContactSpec::Obstacle { psi, .. } => {
            if psi.len() != m || problem.dofs_per_node() != 1 {
                return Err(Error::InvalidArgument("obstacle needs one value per surface node of a 1D body".into()));
            }
            Ok(ContactSystem {
                n_dofs,
                rows: slave_nodes.iter().map(|&s| vec![(s, -1.0)]).collect(),
                slave_nodes,
                pairs: vec![Pairing::Obstacle; m],
                g: Vector::from_iterator(m, psi.iter().map(|p| -p)),
                weights,
            })
        }
        ContactSpec::NodeToSegment { master, .. } => {
            let segs = mesh.surface(master).filter(|s| !s.is_empty()).ok_or_else(|| Error::EmptyMasterSurface(master.clone()))?;
            let pos = |node: usize| {
                let x = mesh.nodes[node];
                [x[0] + u[2 * node], x[1] + u[2 * node + 1]]
            };
            let vertex_normals = vertex_normals(mesh, segs);
            let mut pairs = Vec::with_capacity(m);
            let mut rows = Vec::with_capacity(m);
            let mut g = Vector::zeros(m);
            for (i, &s) in slave_nodes.iter().enumerate() {
                let xs = pos(s);
                let mut best: Option<(f64, usize, f64, f64)> = None;
                for (k, seg) in segs.iter().enumerate() {
                    let (a, b) = (pos(seg[0]), pos(seg[1]));
                    let t = [b[0] - a[0], b[1] - a[1]];
                    let raw = ((xs[0] - a[0]) * t[0] + (xs[1] - a[1]) * t[1]) / (t[0] * t[0] + t[1] * t[1]);
                    let xi = raw.clamp(0.0, 1.0);
                    let d = ((xs[0] - a[0] - xi * t[0]).powi(2) + (xs[1] - a[1] - xi * t[1]).powi(2)).sqrt();
                    if best.is_none_or(|(bd, ..)| d < bd) {
                        best = Some((d, k, xi, raw));
                    }
                }
                let (_, k, xi, raw) = best.unwrap();
                let reach = if held.get(i).copied().unwrap_or(false) { f64::INFINITY } else { END_EXTENSION };
                let outside = (k == 0 && raw < -reach) || (k + 1 == segs.len() && raw > 1.0 + reach);
                if outside {
                    pairs.push(Pairing::Unpaired);
                    rows.push(Vec::new());
                    g[i] = f64::INFINITY;
                    continue;
                }
                let [m1, m2] = segs[k];
                let (xs0, xa0, xb0) = (mesh.nodes[s], mesh.nodes[m1], mesh.nodes[m2]);
                let (na, nb) = (vertex_normals[&m1], vertex_normals[&m2]);
                let n = [(1.0 - xi) * na[0] + xi * nb[0], (1.0 - xi) * na[1] + xi * nb[1]];
                let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
                let n = [n[0] / len, n[1] / len];
                g[i] = (0..2).map(|c| n[c] * (xs0[c] - (1.0 - xi) * xa0[c] - xi * xb0[c])).sum();
                let mut row = Vec::with_capacity(6);
                for c in 0..2 {
                    row.push((2 * s + c, -n[c]));
                    row.push((2 * m1 + c, (1.0 - xi) * n[c]));
                    row.push((2 * m2 + c, xi * n[c]));
                }
                rows.push(row);
                pairs.push(Pairing::Segment { segment: k, xi, normal: n });
            }
            Ok(ContactSystem { n_dofs, slave_nodes, pairs, rows, g, weights })
        }
    }
}

/// Reference unit normal of each master segment.
fn segment_normal(mesh: &Mesh, seg: [usize; 2]) -> [f64; 2] {
    let (a, b) = (mesh.nodes[seg[0]], mesh.nodes[seg[1]]);
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    [(b[1] - a[1]) / len, -(b[0] - a[0]) / len]
}

/// Normals at the master vertices: the normalised mean of the reference
/// normals of the segments sharing the vertex. Interpolating these along a
/// segment gives a normal field that is continuous across vertices, so a
/// slave node sliding over a vertex does not see its constraint row jump.
fn vertex_normals(mesh: &Mesh, segs: &[[usize; 2]]) -> HashMap<usize, [f64; 2]> {
    let mut acc: HashMap<usize, [f64; 2]> = HashMap::new();
    for &seg in segs {
        let n = segment_normal(mesh, seg);
        for v in seg {
            let e = acc.entry(v).or_default();
            e[0] += n[0];
            e[1] += n[1];
        }
    }
    for n in acc.values_mut() {
        let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
        *n = [n[0] / len, n[1] / len];
    }
    acc
}
