//! Quad mesh container with derived adjacency and feature tags.
//!
//! A mesh is a set of vertices and counter-clockwise quads plus optional
//! feature tags: feature edges grouped into curves by id, and corner vertices
//! with a nominal valence. Adjacency (edges, twins, vertex stars) is derived
//! once at construction and the mesh is immutable afterwards.

mod classify;
mod generate;
mod io;

pub use classify::{classify_vertices, expected_valence, VertexClass, VertexKind, VertexSite};
pub use generate::{generate_test_mesh, MeshSpec};
pub use io::{detect_features, load_mesh, save_mesh, MeshFormat};

use std::collections::{BTreeMap, HashMap};

use crate::error::MeshError;
use crate::geom::Vec3;

/// Directed side `side` of quad `quad`, running from `quads[quad][side]` to
/// `quads[quad][(side + 1) % 4]`. The quad lies to its left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Halfedge {
    pub quad: usize,
    pub side: usize,
}

#[derive(Debug, Clone)]
pub struct Edge {
    /// Endpoint vertices, ordered as in the first incident halfedge.
    pub v: [usize; 2],
    pub he: Halfedge,
    pub twin: Option<Halfedge>,
}

/// Edges (and the quads between them) around a vertex in counter-clockwise
/// order. For boundary vertices the star is open: `edges` has one entry more
/// than `quads`, starting and ending with the two boundary edges.
#[derive(Debug, Clone)]
pub struct VertexStar {
    pub edges: Vec<usize>,
    /// `quads[i]` lies between `edges[i]` and `edges[(i + 1) % edges.len()]`.
    pub quads: Vec<usize>,
    pub closed: bool,
}

/// A feature curve: a simple chain of feature edges sharing one curve id.
#[derive(Debug, Clone)]
pub struct Curve {
    /// Chain vertices in order. Open chains list both endpoints; closed
    /// chains list each vertex once and wrap implicitly.
    pub vertices: Vec<usize>,
    pub closed: bool,
}

impl Curve {
    pub fn edge_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadMesh {
    vertices: Vec<Vec3>,
    quads: Vec<[usize; 4]>,
    edges: Vec<Edge>,
    edge_ids: HashMap<(usize, usize), usize>,
    quad_edges: Vec<[usize; 4]>,
    stars: Vec<VertexStar>,
    boundary_vertex: Vec<bool>,
    feature: Vec<Option<usize>>,
    corners: BTreeMap<usize, usize>,
    curves: BTreeMap<usize, Curve>,
}

impl QuadMesh {
    /// Builds a mesh from raw parts, derives adjacency and validates all
    /// structural invariants. Untagged boundary edges are implicitly tagged
    /// as feature edges, one fresh curve id per boundary chain.
    pub fn from_parts(
        vertices: Vec<Vec3>,
        quads: Vec<[usize; 4]>,
        features: Vec<(usize, usize, usize)>,
        corners: Vec<(usize, usize)>,
    ) -> Result<QuadMesh, MeshError> {
        let nv = vertices.len();
        for q in &quads {
            for &v in q {
                if v >= nv {
                    return Err(MeshError::Invalid(format!("vertex index {v} out of range")));
                }
            }
            for i in 0..4 {
                for j in i + 1..4 {
                    if q[i] == q[j] {
                        return Err(MeshError::Invalid(format!(
                            "quad {:?} repeats vertex {}",
                            q, q[i]
                        )));
                    }
                }
            }
        }

        // Edge table. Interior edges must be traversed in opposite directions
        // by their two incident quads (consistent orientation).
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut quad_edges = vec![[usize::MAX; 4]; quads.len()];
        for (qi, q) in quads.iter().enumerate() {
            for side in 0..4 {
                let (a, b) = (q[side], q[(side + 1) % 4]);
                let key = (a.min(b), a.max(b));
                let he = Halfedge { quad: qi, side };
                match edge_ids.get(&key) {
                    None => {
                        edge_ids.insert(key, edges.len());
                        quad_edges[qi][side] = edges.len();
                        edges.push(Edge { v: [a, b], he, twin: None });
                    }
                    Some(&ei) => {
                        let e = &mut edges[ei];
                        if e.twin.is_some() {
                            return Err(MeshError::NonManifold { v0: key.0, v1: key.1, quads: 3 });
                        }
                        if e.v == [a, b] {
                            return Err(MeshError::Orientation { v0: key.0, v1: key.1 });
                        }
                        e.twin = Some(he);
                        quad_edges[qi][side] = ei;
                    }
                }
            }
        }

        let mut boundary_vertex = vec![false; nv];
        for e in &edges {
            if e.twin.is_none() {
                boundary_vertex[e.v[0]] = true;
                boundary_vertex[e.v[1]] = true;
            }
        }

        let mut mesh = QuadMesh {
            vertices,
            quads,
            edges,
            edge_ids,
            quad_edges,
            stars: Vec::new(),
            boundary_vertex,
            feature: Vec::new(),
            corners: BTreeMap::new(),
            curves: BTreeMap::new(),
        };
        mesh.build_stars()?;

        // Feature tags.
        mesh.feature = vec![None; mesh.edges.len()];
        for (a, b, curve) in features {
            let ei = mesh
                .edge_between(a, b)
                .ok_or_else(|| MeshError::Invalid(format!("feature edge ({a}, {b}) not in mesh")))?;
            mesh.feature[ei] = Some(curve);
        }
        mesh.tag_untagged_boundary();
        for (v, nominal) in corners {
            if v >= nv {
                return Err(MeshError::Invalid(format!("corner vertex {v} out of range")));
            }
            if nominal == 0 {
                return Err(MeshError::Invalid(format!("corner {v} has nominal valence 0")));
            }
            mesh.corners.insert(v, nominal);
        }
        mesh.build_curves()?;
        for (&v, _) in &mesh.corners {
            let on_feature = mesh.stars[v].edges.iter().any(|&e| mesh.feature[e].is_some());
            if !on_feature && !mesh.boundary_vertex[v] {
                return Err(MeshError::Invalid(format!(
                    "corner {v} is neither on a feature curve nor on the boundary"
                )));
            }
        }
        Ok(mesh)
    }

    fn build_stars(&mut self) -> Result<(), MeshError> {
        let nv = self.vertices.len();
        let mut out_hes: Vec<Vec<Halfedge>> = vec![Vec::new(); nv];
        for (qi, q) in self.quads.iter().enumerate() {
            for side in 0..4 {
                out_hes[q[side]].push(Halfedge { quad: qi, side });
            }
        }
        let mut stars = Vec::with_capacity(nv);
        for v in 0..nv {
            let hes = &out_hes[v];
            if hes.is_empty() {
                return Err(MeshError::Invalid(format!("vertex {v} has no incident quad")));
            }
            // A fan starts where the clockwise neighbour quad is missing.
            let mut starts: Vec<Halfedge> =
                hes.iter().copied().filter(|&h| self.twin(h).is_none()).collect();
            starts.sort();
            let closed = starts.is_empty();
            if starts.len() > 1 {
                return Err(MeshError::Invalid(format!("non-manifold vertex {v}")));
            }
            let start = if closed { *hes.iter().min().unwrap() } else { starts[0] };
            let mut edges = Vec::new();
            let mut quads = Vec::new();
            let mut h = start;
            loop {
                edges.push(self.quad_edges[h.quad][h.side]);
                quads.push(h.quad);
                match self.twin(self.prev(h)) {
                    Some(next) => {
                        if next == start {
                            break;
                        }
                        h = next;
                        if edges.len() > hes.len() {
                            return Err(MeshError::Invalid(format!("non-manifold vertex {v}")));
                        }
                    }
                    None => {
                        // Open fan: close the edge list with the incoming
                        // boundary edge, which has no outgoing halfedge here.
                        let p = self.prev(h);
                        edges.push(self.quad_edges[p.quad][p.side]);
                        break;
                    }
                }
            }
            if quads.len() != hes.len() {
                return Err(MeshError::Invalid(format!("non-manifold vertex {v}")));
            }
            stars.push(VertexStar { edges, quads, closed });
        }
        self.stars = stars;
        Ok(())
    }

    fn tag_untagged_boundary(&mut self) {
        let mut next_id = self
            .feature
            .iter()
            .flatten()
            .max()
            .map_or(0, |&m| m + 1);
        let untagged: Vec<usize> = (0..self.edges.len())
            .filter(|&e| self.edges[e].twin.is_none() && self.feature[e].is_none())
            .collect();
        let mut incident: HashMap<usize, Vec<usize>> = HashMap::new();
        for &e in &untagged {
            for &v in &self.edges[e].v {
                incident.entry(v).or_default().push(e);
            }
        }
        let mut seen = vec![false; self.edges.len()];
        for &e0 in &untagged {
            if seen[e0] {
                continue;
            }
            // Flood the connected chain of untagged boundary edges.
            let mut stack = vec![e0];
            seen[e0] = true;
            while let Some(e) = stack.pop() {
                self.feature[e] = Some(next_id);
                for &v in &self.edges[e].v {
                    for &n in &incident[&v] {
                        if !seen[n] {
                            seen[n] = true;
                            stack.push(n);
                        }
                    }
                }
            }
            next_id += 1;
        }
    }

    fn build_curves(&mut self) -> Result<(), MeshError> {
        let mut by_curve: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (e, f) in self.feature.iter().enumerate() {
            if let Some(c) = f {
                by_curve.entry(*c).or_default().push(e);
            }
        }
        let mut curves = BTreeMap::new();
        for (c, edges) in by_curve {
            let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &e in &edges {
                for &v in &self.edges[e].v {
                    adj.entry(v).or_default().push(e);
                }
            }
            for (&v, inc) in &adj {
                if inc.len() > 2 {
                    return Err(MeshError::Invalid(format!(
                        "feature curve {c} branches at vertex {v}"
                    )));
                }
            }
            let ends: Vec<usize> = adj
                .iter()
                .filter(|(_, inc)| inc.len() == 1)
                .map(|(&v, _)| v)
                .collect();
            let closed = ends.is_empty();
            let start = if closed {
                *adj.keys().min().unwrap()
            } else if ends.len() == 2 {
                *ends.iter().min().unwrap()
            } else {
                return Err(MeshError::Invalid(format!(
                    "feature curve {c} is not a single chain"
                )));
            };
            let mut vertices = vec![start];
            let mut prev_edge = usize::MAX;
            let mut at = start;
            loop {
                let next_edge = adj[&at].iter().copied().find(|&e| e != prev_edge);
                let Some(e) = next_edge else { break };
                let ev = self.edges[e].v;
                let to = if ev[0] == at { ev[1] } else { ev[0] };
                if closed && to == start {
                    break;
                }
                vertices.push(to);
                prev_edge = e;
                at = to;
                if vertices.len() > edges.len() + 1 {
                    return Err(MeshError::Invalid(format!(
                        "feature curve {c} is not a single chain"
                    )));
                }
            }
            let walked = if closed { vertices.len() } else { vertices.len() - 1 };
            if walked != edges.len() {
                return Err(MeshError::Invalid(format!(
                    "feature curve {c} is not connected"
                )));
            }
            curves.insert(c, Curve { vertices, closed });
        }
        self.curves = curves;
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn quad_count(&self) -> usize {
        self.quads.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn position(&self, v: usize) -> Vec3 {
        self.vertices[v]
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn quad(&self, q: usize) -> [usize; 4] {
        self.quads[q]
    }

    pub fn quads(&self) -> &[[usize; 4]] {
        &self.quads
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_ids.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn edge_other(&self, e: usize, v: usize) -> usize {
        let ev = self.edges[e].v;
        if ev[0] == v {
            ev[1]
        } else {
            ev[0]
        }
    }

    pub fn edge_len(&self, e: usize) -> f64 {
        let ev = self.edges[e].v;
        self.vertices[ev[0]].dist(self.vertices[ev[1]])
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edges[e].twin.is_none()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn star(&self, v: usize) -> &VertexStar {
        &self.stars[v]
    }

    /// Number of incident quads; the valence used for classification.
    pub fn quad_valence(&self, v: usize) -> usize {
        self.stars[v].quads.len()
    }

    pub fn feature_curve_of(&self, e: usize) -> Option<usize> {
        self.feature[e]
    }

    pub fn is_feature_edge(&self, e: usize) -> bool {
        self.feature[e].is_some()
    }

    pub fn corners(&self) -> &BTreeMap<usize, usize> {
        &self.corners
    }

    pub fn corner_nominal(&self, v: usize) -> Option<usize> {
        self.corners.get(&v).copied()
    }

    pub fn curves(&self) -> &BTreeMap<usize, Curve> {
        &self.curves
    }

    pub fn is_on_feature(&self, v: usize) -> bool {
        self.stars[v].edges.iter().any(|&e| self.feature[e].is_some())
    }

    pub fn he_from(&self, h: Halfedge) -> usize {
        self.quads[h.quad][h.side]
    }

    pub fn he_to(&self, h: Halfedge) -> usize {
        self.quads[h.quad][(h.side + 1) % 4]
    }

    pub fn he_edge(&self, h: Halfedge) -> usize {
        self.quad_edges[h.quad][h.side]
    }

    pub fn next(&self, h: Halfedge) -> Halfedge {
        Halfedge { quad: h.quad, side: (h.side + 1) % 4 }
    }

    pub fn prev(&self, h: Halfedge) -> Halfedge {
        Halfedge { quad: h.quad, side: (h.side + 3) % 4 }
    }

    pub fn twin(&self, h: Halfedge) -> Option<Halfedge> {
        let e = &self.edges[self.quad_edges[h.quad][h.side]];
        if e.he == h {
            e.twin
        } else {
            Some(e.he)
        }
    }

    /// Newell normal of a quad (not normalized).
    pub fn quad_normal(&self, q: usize) -> Vec3 {
        let vs = self.quads[q];
        let mut n = Vec3::ZERO;
        for k in 0..4 {
            let a = self.vertices[vs[k]];
            let b = self.vertices[vs[(k + 1) % 4]];
            n += Vec3::new(
                (a.y - b.y) * (a.z + b.z),
                (a.z - b.z) * (a.x + b.x),
                (a.x - b.x) * (a.y + b.y),
            );
        }
        n
    }

    pub fn mean_edge_len(&self) -> f64 {
        let total: f64 = (0..self.edges.len()).map(|e| self.edge_len(e)).sum();
        total / self.edges.len() as f64
    }

    /// Index of `edge` in the star of `v`.
    pub fn star_index(&self, v: usize, edge: usize) -> Option<usize> {
        self.stars[v].edges.iter().position(|&e| e == edge)
    }
}
