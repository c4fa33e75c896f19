use crate::fem::meshgen::unit_interval;
use crate::fem::{AffineValue, Coefficient, Constitutive, ContactSpec, Dirichlet, ElasticProblem};

/// Stiffness of the right half of the rope.
pub const RIGHT_STIFFNESS: f64 = 30.0;

#[derive(Clone, Debug)]
pub struct RopeOptions {
    pub n_nodes: usize,
    /// Uniform distributed load (negative pulls the rope down).
    pub load: f64,
    /// Added to the obstacle profile.
    pub obstacle_shift: f64,
}

impl Default for RopeOptions {
    fn default() -> Self {
        Self { n_nodes: 201, load: -300.0, obstacle_shift: 0.0 }
    }
}

/// Obstacle profile under the rope.
pub fn obstacle(x: f64) -> f64 {
    use std::f64::consts::PI;
    -0.2 * ((PI * x).sin() - (3.0 * PI * x).sin()) - 0.5
}

/// Rope on `[0, 1]` fixed at both ends, `-(nu u')' = f` with
/// `nu = gamma` on `x < 0.5` and `30` elsewhere, above a rigid obstacle.
/// The parameter is `gamma` in `[10, 50]`.
pub fn rope_problem(opts: &RopeOptions) -> ElasticProblem {
    let n = opts.n_nodes;
    let mut mesh = unit_interval(n);
    mesh.element_body = mesh
        .elements
        .iter()
        .map(|e| usize::from(0.5 * (mesh.nodes[e[0]][0] + mesh.nodes[e[1]][0]) >= 0.5))
        .collect();
    mesh.surfaces.insert("interior".into(), (1..n - 2).map(|i| [i, i + 1]).collect());
    let h = 1.0 / (n - 1) as f64;
    let mut load = vec![opts.load * h; n];
    load[0] *= 0.5;
    load[n - 1] *= 0.5;
    let psi = (1..n - 1).map(|i| obstacle(mesh.nodes[i][0]) + opts.obstacle_shift).collect();
    ElasticProblem {
        id: "rope".into(),
        mesh,
        constitutive: Constitutive::Bar { stiffness: vec![Coefficient::Param(0), Coefficient::Const(RIGHT_STIFFNESS)] },
        dirichlet: vec![Dirichlet { nodes: vec![0, n - 1], component: 0, value: AffineValue::constant(0.0) }],
        nodal_load: load,
        contact: ContactSpec::Obstacle { surface: "interior".into(), psi },
        bounds: vec![(10.0, 50.0)],
    }
}
