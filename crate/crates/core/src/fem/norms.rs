use super::assembly::{bar_h1, element_coords, quad_h1};
use super::Mesh;
use crate::densela::Vector;
use crate::{Error, Result};

/// `sum_e v_e^T (K0 + M0)_e v_e`, element by element.
fn h1_norm_sq(mesh: &Mesh, v: &Vector) -> f64 {
    let mut s = 0.0;
    for conn in &mesh.elements {
        if mesh.dim == 1 {
            let m = bar_h1(mesh.distance(conn[0], conn[1]));
            for a in 0..2 {
                for b in 0..2 {
                    s += v[conn[a]] * m[a][b] * v[conn[b]];
                }
            }
        } else {
            let m = quad_h1(&element_coords(mesh, conn), 2);
            let ve: Vec<f64> = conn.iter().flat_map(|&n| [v[2 * n], v[2 * n + 1]]).collect();
            for a in 0..8 {
                for b in 0..8 {
                    s += ve[a] * m[(a, b)] * ve[b];
                }
            }
        }
    }
    s.max(0.0)
}

/// Relative discrete H1 error `|u - u_ref|_H1 / |u_ref|_H1` over all dofs.
pub fn h1_error(mesh: &Mesh, u: &Vector, u_ref: &Vector) -> Result<f64> {
    let n = mesh.num_nodes() * mesh.dim;
    if u.len() != n || u_ref.len() != n {
        return Err(Error::DimensionMismatch(format!("h1_error: expected {n} dofs")));
    }
    let reference = h1_norm_sq(mesh, u_ref);
    if reference == 0.0 {
        return Err(Error::InvalidArgument("h1_error: zero reference".into()));
    }
    Ok((h1_norm_sq(mesh, &(u - u_ref)) / reference).sqrt())
}

/// Relative L2 error of nodal multipliers on a surface, with node-centred
/// piecewise-constant shape functions. Vectors are in polyline order.
pub fn l2_surface_error(mesh: &Mesh, surface: &str, lam: &Vector, lam_ref: &Vector) -> Result<f64> {
    let (_, w) = mesh
        .surface_weights(surface)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown surface {surface}")))?;
    l2_weighted_error(&w, lam, lam_ref)
}

/// Same as [`l2_surface_error`] with precomputed nodal weights.
pub fn l2_weighted_error(w: &[f64], lam: &Vector, lam_ref: &Vector) -> Result<f64> {
    if lam.len() != w.len() || lam_ref.len() != w.len() {
        return Err(Error::DimensionMismatch(format!("l2 error: expected {} surface values", w.len())));
    }
    let reference: f64 = w.iter().zip(lam_ref.iter()).map(|(w, l)| w * l * l).sum();
    if reference == 0.0 {
        return Err(Error::InvalidArgument("l2 error: zero reference".into()));
    }
    let err: f64 = w.iter().zip(lam.iter().zip(lam_ref.iter())).map(|(w, (a, b))| w * (a - b).powi(2)).sum();
    Ok((err / reference).sqrt())
}
