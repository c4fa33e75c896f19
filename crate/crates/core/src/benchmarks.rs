//! The two-dimensional benchmark problems.
//!
//! * `hertz`: two unit half-discs touching at one point; the lower flat edge
//!   is clamped and the upper one pushed down by `d`.
//! * `ironing`: a 1x1 iron block on a 5x1 slab, pressed down by 0.3 and
//!   dragged horizontally by `d_x`.
//! * `ironing2p`: as `ironing` with the indentation `d_y` as a second
//!   parameter.
//!
//! All use plane strain with `E = 1`, `nu = 0.3`.

use crate::fem::meshgen::{half_disc, rectangle, Facing, MeshBuilder};
use crate::fem::{AffineValue, Coefficient, Constitutive, ContactSpec, Dirichlet, ElasticProblem};

pub const YOUNGS: f64 = 1.0;
pub const POISSON: f64 = 0.3;

pub const HERTZ_MAX_D: f64 = 0.3;
pub const SLAB_LENGTH: f64 = 5.0;
pub const IRONING_DEPTH: f64 = 0.3;
pub const IRONING2P_DEPTH: (f64, f64) = (0.1, 0.3);

fn elastic(id: &str, builder: MeshBuilder) -> (ElasticProblem, std::collections::BTreeMap<String, Vec<usize>>) {
    let (mesh, sets) = builder.build();
    let n = 2 * mesh.num_nodes();
    let bodies = mesh.num_bodies();
    let problem = ElasticProblem {
        id: id.into(),
        mesh,
        constitutive: Constitutive::PlaneStrain { youngs: vec![Coefficient::Const(YOUNGS); bodies], poisson: POISSON },
        dirichlet: Vec::new(),
        nodal_load: vec![0.0; n],
        contact: ContactSpec::NodeToSegment { master: String::new(), slave: String::new() },
        bounds: Vec::new(),
    };
    (problem, sets)
}

fn fixed(nodes: &[usize], component: usize, value: AffineValue) -> Dirichlet {
    Dirichlet { nodes: nodes.to_vec(), component, value }
}

/// Hertz contact of two half-discs; parameter `d` in `[0, 0.3]`.
pub fn hertz() -> ElasticProblem {
    let mut b = MeshBuilder::new();
    b.add_body("lower", &half_disc([0.0, 0.0], 1.0, Facing::Up));
    b.add_body("upper", &half_disc([0.0, 2.0], 1.0, Facing::Down));
    let (mut p, sets) = elastic("hertz", b);
    p.dirichlet = vec![
        fixed(&sets["lower_flat"], 0, AffineValue::constant(0.0)),
        fixed(&sets["lower_flat"], 1, AffineValue::constant(0.0)),
        fixed(&sets["upper_flat"], 0, AffineValue::constant(0.0)),
        fixed(&sets["upper_flat"], 1, AffineValue::param(0, -1.0)),
    ];
    p.contact = ContactSpec::NodeToSegment { master: "lower_arc".into(), slave: "upper_arc".into() };
    p.bounds = vec![(0.0, HERTZ_MAX_D)];
    p
}

fn ironing_base(id: &str) -> (ElasticProblem, std::collections::BTreeMap<String, Vec<usize>>) {
    let mut b = MeshBuilder::new();
    b.add_body("slab", &rectangle([0.0, 0.0], SLAB_LENGTH, 1.0, 50, 10));
    b.add_body("iron", &rectangle([-0.5, 1.0], 1.0, 1.0, 15, 15));
    let (mut p, sets) = elastic(id, b);
    p.contact = ContactSpec::NodeToSegment { master: "iron_bottom".into(), slave: "slab_top".into() };
    p.dirichlet = vec![
        fixed(&sets["slab_bottom"], 0, AffineValue::constant(0.0)),
        fixed(&sets["slab_bottom"], 1, AffineValue::constant(0.0)),
        fixed(&sets["iron_top"], 0, AffineValue::param(0, 1.0)),
    ];
    (p, sets)
}

/// Ironing with horizontal travel `d_x` in `[0, 5]` at fixed indentation.
pub fn ironing() -> ElasticProblem {
    let (mut p, sets) = ironing_base("ironing");
    p.dirichlet.push(fixed(&sets["iron_top"], 1, AffineValue::constant(-IRONING_DEPTH)));
    p.bounds = vec![(0.0, SLAB_LENGTH)];
    p
}

/// Ironing with `(d_x, d_y)` in `[0, 5] x [0.1, 0.3]`.
pub fn ironing2p() -> ElasticProblem {
    let (mut p, sets) = ironing_base("ironing2p");
    p.dirichlet.push(fixed(&sets["iron_top"], 1, AffineValue::param(1, -1.0)));
    p.bounds = vec![(0.0, SLAB_LENGTH), IRONING2P_DEPTH];
    p
}

/// Benchmark by name (`hertz`, `ironing`, `ironing2p`, `rope`).
pub fn by_name(name: &str) -> Option<ElasticProblem> {
    match name {
        "hertz" => Some(hertz()),
        "ironing" => Some(ironing()),
        "ironing2p" => Some(ironing2p()),
        "rope" => Some(crate::convexhull::rope_problem(&Default::default())),
        _ => None,
    }
}
