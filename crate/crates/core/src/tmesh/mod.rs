//! Trace propagation and T-mesh assembly.
//!
//! Traces are motorcycle-graph separatrices grown from irregular vertices and
//! corners. Where they cross they create nodes; the segments between nodes
//! become arcs, and the regions bounded by arcs become the patches of the
//! T-mesh. Initial arc lengths (mesh edge counts) are the feasible starting
//! point for the quantization step.

mod build;
mod propagate;
mod records;

use std::collections::BTreeSet;

pub use build::build_tmesh;
pub use propagate::{propagate_traces, propagate_traces_with};
pub use records::intersection_records;

use crate::mesh::{Halfedge, QuadMesh, VertexClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Reached a seed vertex (irregular vertex or loop anchor), or closed a
    /// loop back onto its own origin.
    HitIrregular,
    /// The per-side cone tallies were satisfied at a vertex occupied by
    /// another trace.
    ConeSatisfied,
    /// Reached a corner, the mesh boundary, or the end of a feature chain.
    HitBoundaryCorner,
}

/// How many qualifying candidates per side a non-feature trace must cross
/// before it may stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// One candidate on each side (default).
    OnePerSide,
    /// Two orthogonal traces on each side (alternative reading).
    TwoPerSide,
    /// Never stop early; run every trace to a seed or the boundary. Used for
    /// the input layout count.
    Never,
}

impl StopRule {
    pub(crate) fn threshold(self) -> usize {
        match self {
            StopRule::OnePerSide => 1,
            StopRule::TwoPerSide => 2,
            StopRule::Never => usize::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceConfig {
    /// Cone half-angle in radians, within [0, π/4].
    pub alpha: f64,
    pub stop_rule: StopRule,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig { alpha: std::f64::consts::FRAC_PI_4, stop_rule: StopRule::OnePerSide }
    }
}

/// One propagated trace. Opposite runs of the same separatrix are
/// deduplicated, keeping the run with the smaller (origin, direction).
#[derive(Debug, Clone)]
pub struct Trace {
    /// Seed vertex the trace grew from.
    pub origin: usize,
    /// Index of the first edge in the origin's star.
    pub dir_index: usize,
    /// Halfedge of the first edge (forward orientation where the mesh has
    /// one; the boundary-closing direction of an open star only has the
    /// incoming copy).
    pub direction: Halfedge,
    pub edge_path: Vec<usize>,
    /// origin, then one vertex per traversed edge.
    pub vertex_path: Vec<usize>,
    /// Curve id when the trace runs along a feature curve; such traces use
    /// cone angle 0.
    pub on_feature: Option<usize>,
    pub stop_reason: StopReason,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.edge_path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_path.is_empty()
    }

    pub fn end(&self) -> usize {
        *self.vertex_path.last().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Irregular,
    Corner,
    TJunction,
    Crossing,
}

impl NodeKind {
    pub fn label(self) -> &'static str {
        match self {
            NodeKind::Irregular => "irregular",
            NodeKind::Corner => "corner",
            NodeKind::TJunction => "t_junction",
            NodeKind::Crossing => "crossing",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TMeshNode {
    pub vertex: usize,
    pub kind: NodeKind,
}

/// Segment of a trace between two nodes. Paths are stored in a canonical
/// orientation so overlapping runs from two traces share one arc.
#[derive(Debug, Clone)]
pub struct Arc {
    /// Endpoint node ids in path order; equal for a closed loop arc.
    pub nodes: [usize; 2],
    pub vertex_path: Vec<usize>,
    pub edge_path: Vec<usize>,
    pub on_feature: Option<usize>,
}

impl Arc {
    /// Initial integer length: the mesh edge count, always ≥ 1.
    pub fn len(&self) -> usize {
        self.edge_path.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SideArc {
    pub arc: usize,
    /// Whether the side traverses the arc in its stored path order.
    pub forward: bool,
}

/// Quadrilateral region of the T-mesh. Sides are listed counter-clockwise
/// (surface on the left); sides 0/2 and 1/3 are opposite.
#[derive(Debug, Clone)]
pub struct Patch {
    pub sides: [Vec<SideArc>; 4],
    pub corner_nodes: [usize; 4],
}

#[derive(Debug, Clone)]
pub struct TMesh {
    pub nodes: Vec<TMeshNode>,
    pub arcs: Vec<Arc>,
    pub patches: Vec<Patch>,
    /// Patch id per mesh quad.
    pub patch_of_quad: Vec<usize>,
    node_of_vertex: std::collections::BTreeMap<usize, usize>,
    arc_of_edge: std::collections::HashMap<usize, usize>,
    /// Per input trace: (path position, node id) in path order. The first
    /// entry is the origin, the last the endpoint.
    trace_nodes: Vec<Vec<(usize, usize)>>,
}

impl TMesh {
    pub fn node_at_vertex(&self, v: usize) -> Option<usize> {
        self.node_of_vertex.get(&v).copied()
    }

    pub fn arc_at_edge(&self, e: usize) -> Option<usize> {
        self.arc_of_edge.get(&e).copied()
    }

    /// Node ids along a trace, with their positions in its vertex path.
    pub fn trace_nodes(&self, trace: usize) -> &[(usize, usize)] {
        &self.trace_nodes[trace]
    }

    /// Initial integer length of one patch side.
    pub fn side_initial_len(&self, patch: usize, side: usize) -> usize {
        self.patches[patch].sides[side].iter().map(|s| self.arcs[s.arc].len()).sum()
    }

    /// Arc ids covering `trace` from its origin up to path position `to`.
    /// `to` must be a node position on the trace.
    pub fn arcs_to(&self, trace: &Trace, trace_idx: usize, to: usize) -> Vec<usize> {
        let nodes = &self.trace_nodes[trace_idx];
        debug_assert!(nodes.iter().any(|&(p, _)| p == to));
        let mut out = Vec::new();
        for w in nodes.windows(2) {
            let (p0, _) = w[0];
            let (p1, _) = w[1];
            if p1 > to {
                break;
            }
            let arc = self.arc_of_edge[&trace.edge_path[p0]];
            out.push(arc);
        }
        out
    }

    /// Structural self-check used by tests and debug builds. Verifies the
    /// quadrilateral patch property, opposite side sums, the quad partition,
    /// arc path integrity and Euler consistency against the underlying mesh.
    pub fn check_invariants(&self, mesh: &QuadMesh) -> Result<(), String> {
        for (i, arc) in self.arcs.iter().enumerate() {
            if arc.edge_path.is_empty() || arc.vertex_path.len() != arc.edge_path.len() + 1 {
                return Err(format!("arc {i} has an inconsistent path"));
            }
            for (k, &e) in arc.edge_path.iter().enumerate() {
                let (a, b) = (arc.vertex_path[k], arc.vertex_path[k + 1]);
                if mesh.edge_between(a, b) != Some(e) {
                    return Err(format!("arc {i} path breaks at edge {k}"));
                }
                if self.arc_of_edge.get(&e) != Some(&i) {
                    return Err(format!("mesh edge {e} not owned by arc {i}"));
                }
            }
            for (&end, &pv) in arc.nodes.iter().zip([
                arc.vertex_path[0],
                *arc.vertex_path.last().unwrap(),
            ]
            .iter())
            {
                if self.nodes[end].vertex != pv {
                    return Err(format!("arc {i} endpoint does not sit on its node"));
                }
            }
        }
        for (p, patch) in self.patches.iter().enumerate() {
            for side in &patch.sides {
                if side.is_empty() {
                    return Err(format!("patch {p} has an empty side"));
                }
            }
            let s: Vec<usize> = (0..4).map(|k| self.side_initial_len(p, k)).collect();
            if s[0] != s[2] || s[1] != s[3] {
                return Err(format!("patch {p} opposite side sums differ: {s:?}"));
            }
        }
        if self.patch_of_quad.len() != mesh.quad_count() {
            return Err("patch_of_quad does not cover the mesh".into());
        }
        for (q, &p) in self.patch_of_quad.iter().enumerate() {
            if p >= self.patches.len() {
                return Err(format!("quad {q} assigned to missing patch {p}"));
            }
        }
        let mesh_euler =
            mesh.vertex_count() as i64 - mesh.edge_count() as i64 + mesh.quad_count() as i64;
        let t_euler =
            self.nodes.len() as i64 - self.arcs.len() as i64 + self.patches.len() as i64;
        if mesh_euler != t_euler {
            return Err(format!("Euler mismatch: mesh {mesh_euler}, T-mesh {t_euler}"));
        }
        Ok(())
    }
}

/// Ordered crossing record of two traces at a node, with the exact integer
/// distances from both origins and the arc lists covering those distances.
#[derive(Debug, Clone)]
pub struct IntersectionRecord {
    /// Origin node of the first trace.
    pub i: usize,
    /// Origin node of the second trace.
    pub j: usize,
    /// The crossing node.
    pub n: usize,
    pub l_ij: usize,
    pub l_ji: usize,
    /// Arcs from i's origin to n along t_i.
    pub s_ij: Vec<usize>,
    /// Arcs from j's origin to n along t_j.
    pub s_ji: Vec<usize>,
    /// l_ji / l_ij ≤ tan α_i (α_i = 0 on feature traces), with a small
    /// tolerance on the ratio test.
    pub in_cone_of_i: bool,
    /// l_ji ≤ l_ij, exact.
    pub in_pi4_cone_of_i: bool,
}

/// A trace that ended on a seed vertex. The contact has distance 0 from the
/// seed, so it qualifies for any cone.
#[derive(Debug, Clone)]
pub struct TerminalRecord {
    pub trace: usize,
    /// Origin node of the trace.
    pub origin: usize,
    /// The seed node it ended on (equals `origin` for a closed loop run).
    pub end: usize,
    pub len: usize,
}

/// Per trace, the first contact whose source lies in the π/4 cone: either a
/// crossing with another trace or a terminal hit on a seed.
#[derive(Debug, Clone)]
pub struct ValidityPick {
    /// The contact node.
    pub node: usize,
    /// The separated counterpart: origin node of the crossing trace, or the
    /// terminal seed node itself.
    pub star: usize,
    /// Arcs from the trace origin to the contact node.
    pub arcs: Vec<usize>,
    pub l_i: usize,
    pub l_star: usize,
}

#[derive(Debug, Clone)]
pub struct TraceIntersections {
    pub records: Vec<IntersectionRecord>,
    pub terminals: Vec<TerminalRecord>,
    /// Parallel to the trace list; None when a trace meets nothing in its
    /// π/4 cone.
    pub validity: Vec<Option<ValidityPick>>,
}

/// Trace seeds: irregular vertices, corners, and one anchor per closed
/// feature loop that carries neither. Without the anchors a bare loop (an
/// annulus boundary, say) would bound no arc and the regions could not be
/// quadrilateral.
pub fn seed_vertices(mesh: &QuadMesh, classes: &[VertexClass]) -> BTreeSet<usize> {
    let mut seeds: BTreeSet<usize> = classes
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_irregular())
        .map(|(v, _)| v)
        .collect();
    seeds.extend(mesh.corners().keys().copied());
    for curve in mesh.curves().values() {
        if curve.closed && !curve.vertices.iter().any(|v| seeds.contains(v)) {
            seeds.insert(*curve.vertices.iter().min().unwrap());
        }
    }
    seeds
}

/// Text dump of a T-mesh, used by golden-file tests.
pub fn dump_tmesh(tmesh: &TMesh) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    out.push_str("quadcoarse-tmesh v1\n");
    writeln!(out, "nodes {}", tmesh.nodes.len()).unwrap();
    for (i, n) in tmesh.nodes.iter().enumerate() {
        writeln!(out, "{} {} {}", i, n.vertex, n.kind.label()).unwrap();
    }
    writeln!(out, "arcs {}", tmesh.arcs.len()).unwrap();
    for (i, a) in tmesh.arcs.iter().enumerate() {
        let feature = a
            .on_feature
            .map(|c| c.to_string())
            .unwrap_or_else(|| "-".into());
        let path: Vec<String> = a.vertex_path.iter().map(|v| v.to_string()).collect();
        writeln!(
            out,
            "{} {} {} {} {} {}",
            i,
            a.nodes[0],
            a.nodes[1],
            a.len(),
            feature,
            path.join(" ")
        )
        .unwrap();
    }
    writeln!(out, "patches {}", tmesh.patches.len()).unwrap();
    for (p, patch) in tmesh.patches.iter().enumerate() {
        let corners: Vec<String> =
            patch.corner_nodes.iter().map(|n| n.to_string()).collect();
        writeln!(out, "p{} corners {}", p, corners.join(" ")).unwrap();
        for (k, side) in patch.sides.iter().enumerate() {
            let arcs: Vec<String> = side
                .iter()
                .map(|s| format!("{}{}", if s.forward { "+" } else { "-" }, s.arc))
                .collect();
            writeln!(out, "p{} s{} {}", p, k, arcs.join(" ")).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests;
