use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Unstructured mesh of 4-node quads (dim 2) or 2-node bars (dim 1).
///
/// Nodes always carry two coordinates; 1D meshes keep `y = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub dim: usize,
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<Vec<usize>>,
    /// Body index of each element.
    pub element_body: Vec<usize>,
    /// Named boundary polylines as ordered node pairs. Two-dimensional
    /// surfaces are oriented counterclockwise around their body.
    pub surfaces: BTreeMap<String, Vec<[usize; 2]>>,
}

impl Mesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_bodies(&self) -> usize {
        self.element_body.iter().max().map_or(0, |b| b + 1)
    }

    pub fn nodes_per_element(&self) -> usize {
        if self.dim == 1 {
            2
        } else {
            4
        }
    }

    pub fn surface(&self, name: &str) -> Option<&[[usize; 2]]> {
        self.surfaces.get(name).map(Vec::as_slice)
    }

    /// Nodes of a surface polyline, in order.
    pub fn surface_nodes(&self, name: &str) -> Option<Vec<usize>> {
        let segs = self.surface(name)?;
        let mut nodes = Vec::with_capacity(segs.len() + 1);
        if let Some(first) = segs.first() {
            nodes.push(first[0]);
        }
        nodes.extend(segs.iter().map(|s| s[1]));
        Some(nodes)
    }

    /// Nodal quadrature weights of a surface: half the summed length of the
    /// adjacent segments. Returned in polyline order.
    pub fn surface_weights(&self, name: &str) -> Option<(Vec<usize>, Vec<f64>)> {
        let segs = self.surface(name)?;
        let nodes = self.surface_nodes(name)?;
        let mut weights = vec![0.0; nodes.len()];
        for (k, s) in segs.iter().enumerate() {
            let half = 0.5 * self.distance(s[0], s[1]);
            weights[k] += half;
            weights[k + 1] += half;
        }
        Some((nodes, weights))
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.nodes[a], self.nodes[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    }

    /// Structural checks: index ranges, element arity, positive corner
    /// Jacobians for quads and connected surface polylines.
    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::InvalidMesh(format!("unsupported dimension {}", self.dim)));
        }
        if self.element_body.len() != self.elements.len() {
            return Err(Error::InvalidMesh("element_body length".into()));
        }
        let n = self.num_nodes();
        let arity = self.nodes_per_element();
        for (e, conn) in self.elements.iter().enumerate() {
            if conn.len() != arity || conn.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!("element {e} has bad connectivity {conn:?}")));
            }
            if self.dim == 2 && !quad_is_valid(self, conn) {
                return Err(Error::InvertedElement { element: e });
            }
            if self.dim == 1 && self.distance(conn[0], conn[1]) == 0.0 {
                return Err(Error::InvertedElement { element: e });
            }
        }
        for (name, segs) in &self.surfaces {
            if segs.iter().flatten().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!("surface {name} references missing nodes")));
            }
            if segs.windows(2).any(|w| w[0][1] != w[1][0]) {
                return Err(Error::InvalidMesh(format!("surface {name} is not a connected polyline")));
            }
        }
        Ok(())
    }
}

fn quad_is_valid(mesh: &Mesh, conn: &[usize]) -> bool {
    (0..4).all(|k| {
        let p = mesh.nodes[conn[k]];
        let next = mesh.nodes[conn[(k + 1) % 4]];
        let prev = mesh.nodes[conn[(k + 3) % 4]];
        let a = [next[0] - p[0], next[1] - p[1]];
        let b = [prev[0] - p[0], prev[1] - p[1]];
        a[0] * b[1] - a[1] * b[0] > 0.0
    })
}
