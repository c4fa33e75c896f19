//! Linear-elastic assembly for bilinear quads and bars, Dirichlet
//! elimination, and the discrete error norms.

mod assembly;
mod mesh;
mod mesh_io;
pub mod meshgen;
mod norms;
mod problem;

pub use assembly::{
    assemble_load_and_bc, assemble_stiffness, assemble_stiffness_terms, gauss_rule, plane_strain_matrix,
    quad_stiffness, quad_stress, shape,
};
pub use mesh::Mesh;
pub use mesh_io::{load_mesh, save_mesh};
pub use norms::{h1_error, l2_surface_error, l2_weighted_error};
pub use problem::{
    AffineValue, Coefficient, Constitutive, ContactSpec, Dirichlet, Discretization, ElasticProblem, StiffnessTerm,
};
