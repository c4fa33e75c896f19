//! Benchmark mesh generators. No external mesher is involved.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::Mesh;

/// Which side of the flat edge the arc of a half-disc lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Facing {
    Up,
    Down,
}

/// A single generated body before it is merged into a [`Mesh`].
#[derive(Clone, Debug, Default)]
pub struct BodyPatch {
    pub nodes: Vec<[f64; 2]>,
    pub quads: Vec<[usize; 4]>,
    pub edges: BTreeMap<String, Vec<usize>>,
}

/// Ring radii (fractions of the radius) and segment counts of the graded
/// half-disc triangulation. Splitting into quads doubles the arc resolution
/// to 78 segments.
const RING_RADII: [f64; 6] = [0.2, 0.4, 0.62, 0.8, 0.92, 1.0];
const RING_SEGMENTS: [usize; 6] = [3, 6, 12, 20, 30, 39];

/// Graded quad mesh of a half-disc: concentric rings are triangulated and
/// every triangle split into three quads through its centroid.
///
/// Edges: `"arc"` (ordered counterclockwise around the body) and `"flat"`.
pub fn half_disc(center: [f64; 2], radius: f64, facing: Facing) -> BodyPatch {
    // ring nodes on the unit upper half-disc
    let mut pts: Vec<[f64; 2]> = vec![[0.0, 0.0]];
    let mut rings: Vec<Vec<usize>> = vec![vec![0]];
    let mut angles: Vec<Vec<f64>> = vec![vec![0.0]];
    for (&r, &m) in RING_RADII.iter().zip(&RING_SEGMENTS) {
        let mut ring = Vec::with_capacity(m + 1);
        let mut ang = Vec::with_capacity(m + 1);
        for j in 0..=m {
            let t = std::f64::consts::PI * j as f64 / m as f64;
            ring.push(pts.len());
            ang.push(t);
            pts.push([r * t.cos(), r * t.sin()]);
        }
        rings.push(ring);
        angles.push(ang);
    }

    let mut tris: Vec<[usize; 3]> = Vec::new();
    for k in 1..rings.len() {
        let (inner, outer) = (&rings[k - 1], &rings[k]);
        let (ai, ao) = (&angles[k - 1], &angles[k]);
        if inner.len() == 1 {
            for j in 0..outer.len() - 1 {
                tris.push([inner[0], outer[j], outer[j + 1]]);
            }
            continue;
        }
        let (mut i, mut j) = (0, 0);
        while i + 1 < inner.len() || j + 1 < outer.len() {
            let advance_outer = if i + 1 == inner.len() {
                true
            } else if j + 1 == outer.len() {
                false
            } else {
                ao[j + 1] <= ai[i + 1]
            };
            if advance_outer {
                tris.push([inner[i], outer[j], outer[j + 1]]);
                j += 1;
            } else {
                tris.push([inner[i], outer[j], inner[i + 1]]);
                i += 1;
            }
        }
    }
    for t in &mut tris {
        if signed_area(&pts, t) < 0.0 {
            t.swap(1, 2);
        }
    }

    let outer = rings.last().unwrap().clone();
    let on_arc: HashMap<(usize, usize), ()> =
        outer.windows(2).map(|w| (edge_key(w[0], w[1]), ())).collect();
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut quads = Vec::with_capacity(3 * tris.len());
    let n_vertices = pts.len();
    for t in &tris {
        let mut mid = |a: usize, b: usize, pts: &mut Vec<[f64; 2]>| -> usize {
            *mids.entry(edge_key(a, b)).or_insert_with(|| {
                let (p, q) = (pts[a], pts[b]);
                let mut m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                if on_arc.contains_key(&edge_key(a, b)) {
                    let r = (m[0] * m[0] + m[1] * m[1]).sqrt();
                    m = [m[0] / r, m[1] / r];
                }
                pts.push(m);
                pts.len() - 1
            })
        };
        let [a, b, c] = *t;
        let mab = mid(a, b, &mut pts);
        let mbc = mid(b, c, &mut pts);
        let mca = mid(c, a, &mut pts);
        let g = pts.len();
        pts.push([
            (pts[a][0] + pts[b][0] + pts[c][0]) / 3.0,
            (pts[a][1] + pts[b][1] + pts[c][1]) / 3.0,
        ]);
        quads.push([a, mab, g, mca]);
        quads.push([b, mbc, g, mab]);
        quads.push([c, mca, g, mbc]);
    }
    debug_assert!(pts.len() > n_vertices);

    let mut arc = Vec::with_capacity(2 * outer.len());
    for w in outer.windows(2) {
        arc.push(w[0]);
        arc.push(mids[&edge_key(w[0], w[1])]);
    }
    arc.push(*outer.last().unwrap());

    let mut flat: Vec<usize> = (0..pts.len()).filter(|&i| pts[i][1].abs() < 1e-14).collect();
    flat.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]));

    let mut patch = BodyPatch { nodes: pts, quads, edges: BTreeMap::new() };
    for p in &mut patch.nodes {
        let y = if facing == Facing::Up { p[1] } else { -p[1] };
        *p = [center[0] + radius * p[0], center[1] + radius * y];
    }
    if facing == Facing::Down {
        for q in &mut patch.quads {
            q.reverse();
        }
        arc.reverse();
    }
    patch.edges.insert("arc".into(), arc);
    patch.edges.insert("flat".into(), flat);
    patch
}

/// Structured `nx x ny`-node rectangle. Edges `"bottom"`, `"right"`, `"top"`,
/// `"left"` are ordered counterclockwise around the body.
pub fn rectangle(origin: [f64; 2], width: f64, height: f64, nx: usize, ny: usize) -> BodyPatch {
    assert!(nx >= 2 && ny >= 2);
    let id = |i: usize, j: usize| i * ny + j;
    let mut nodes = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            nodes.push([
                origin[0] + width * i as f64 / (nx - 1) as f64,
                origin[1] + height * j as f64 / (ny - 1) as f64,
            ]);
        }
    }
    let mut quads = Vec::with_capacity((nx - 1) * (ny - 1));
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            quads.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let mut edges = BTreeMap::new();
    edges.insert("bottom".into(), (0..nx).map(|i| id(i, 0)).collect());
    edges.insert("right".into(), (0..ny).map(|j| id(nx - 1, j)).collect());
    edges.insert("top".into(), (0..nx).rev().map(|i| id(i, ny - 1)).collect());
    edges.insert("left".into(), (0..ny).rev().map(|j| id(0, j)).collect());
    BodyPatch { nodes, quads, edges }
}

/// Accumulates bodies into one [`Mesh`] and renumbers nodes with reverse
/// Cuthill-McKee so that the stiffness envelope stays narrow.
#[derive(Default)]
pub struct MeshBuilder {
    nodes: Vec<[f64; 2]>,
    elements: Vec<Vec<usize>>,
    element_body: Vec<usize>,
    surfaces: BTreeMap<String, Vec<[usize; 2]>>,
    node_sets: BTreeMap<String, Vec<usize>>,
}

impl MeshBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a body; each patch edge is registered under `"{prefix}_{edge}"`,
    /// both as a surface polyline and as a node set.
    pub fn add_body(&mut self, prefix: &str, patch: &BodyPatch) -> usize {
        let body = self.element_body.iter().max().map_or(0, |b| b + 1);
        let offset = self.nodes.len();
        self.nodes.extend_from_slice(&patch.nodes);
        for q in &patch.quads {
            self.elements.push(q.iter().map(|i| i + offset).collect());
            self.element_body.push(body);
        }
        for (name, chain) in &patch.edges {
            let key = format!("{prefix}_{name}");
            let global: Vec<usize> = chain.iter().map(|i| i + offset).collect();
            self.surfaces.insert(key.clone(), global.windows(2).map(|w| [w[0], w[1]]).collect());
            self.node_sets.insert(key, global);
        }
        body
    }

    /// Finish the mesh; returns it together with renumbered node sets.
    pub fn build(self) -> (Mesh, BTreeMap<String, Vec<usize>>) {
        let perm = reverse_cuthill_mckee(self.nodes.len(), &self.elements);
        // perm[new] = old
        let mut new_of = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            new_of[old] = new;
        }
        let nodes = perm.iter().map(|&old| self.nodes[old]).collect();
        let elements = self.elements.iter().map(|e| e.iter().map(|&i| new_of[i]).collect()).collect();
        let surfaces = self
            .surfaces
            .into_iter()
            .map(|(k, segs)| (k, segs.into_iter().map(|[a, b]| [new_of[a], new_of[b]]).collect()))
            .collect();
        let sets = self
            .node_sets
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().map(|i| new_of[i]).collect()))
            .collect();
        (Mesh { dim: 2, nodes, elements, element_body: self.element_body, surfaces }, sets)
    }
}

/// Uniform 1D mesh of `[0, 1]` with `n` nodes; the whole line is the
/// surface `"rope"`.
pub fn unit_interval(n: usize) -> Mesh {
    assert!(n >= 2);
    let nodes = (0..n).map(|i| [i as f64 / (n - 1) as f64, 0.0]).collect();
    let elements: Vec<Vec<usize>> = (0..n - 1).map(|i| vec![i, i + 1]).collect();
    let segs = (0..n - 1).map(|i| [i, i + 1]).collect();
    Mesh {
        dim: 1,
        nodes,
        element_body: vec![0; n - 1],
        elements,
        surfaces: BTreeMap::from([("rope".to_string(), segs)]),
    }
}

/// Node permutation `perm[new] = old`.
pub fn reverse_cuthill_mckee(n: usize, elements: &[Vec<usize>]) -> Vec<usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in elements {
        for &a in e {
            for &b in e {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        // lowest-degree unvisited node starts the next component
        let Some(start) = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (adj[i].len(), i)) else {
            break;
        };
        let start = pseudo_peripheral(start, &adj);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(start: usize, adj: &[Vec<usize>]) -> usize {
    let mut node = start;
    let mut ecc = 0;
    for _ in 0..8 {
        let levels = bfs_levels(node, adj);
        let max = *levels.iter().flatten().max().unwrap();
        if max <= ecc && ecc > 0 {
            break;
        }
        ecc = max;
        node = (0..adj.len())
            .filter(|&i| levels[i] == Some(max))
            .min_by_key(|&i| (adj[i].len(), i))
            .unwrap();
    }
    node
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut levels = vec![None; adj.len()];
    levels[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let l = levels[v].unwrap();
        for &w in &adj[v] {
            if levels[w].is_none() {
                levels[w] = Some(l + 1);
                queue.push_back(w);
            }
        }
    }
    levels
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn signed_area(pts: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let (a, b, c) = (pts[t[0]], pts[t[1]], pts[t[2]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}
