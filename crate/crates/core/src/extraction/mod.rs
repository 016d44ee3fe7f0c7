//! Coarse layout extraction from an optimized quantization.
//!
//! Four stages. `split` refines the T-mesh so every arc and patch has unit
//! quantized size, keeping zero-length edges and zero-area patches explicit.
//! `merge` contracts the zero-length structure: vertex groups over zero
//! edges, edge pairs across zero-area patches. `place` picks a center vertex
//! per group on the input mesh and embeds every surviving edge as a path of
//! input vertices. `subdivide` assigns one integer width per quad loop and
//! fills each patch by transfinite interpolation, producing the
//! block-structured fine mesh.

mod merge;
mod place;
mod split;
mod subdivide;

use std::collections::BTreeSet;

pub use merge::merge;
pub use place::place;
pub use split::split;
pub use subdivide::{loop_width, subdivide};

use crate::error::{ExtractError, MeshError};
use crate::geom::Vec3;
use crate::mesh::{classify_vertices, QuadMesh};
use crate::tmesh::TMesh;

/// Output of `split`: the T-mesh refined to unit quantized size. Edges of
/// length zero and patches of area zero are kept; `merge` consumes them.
#[derive(Debug, Clone)]
pub struct RefinedLayout {
    /// Input mesh vertex backing each refined vertex.
    pub anchors: Vec<usize>,
    pub edges: Vec<RefinedEdge>,
    /// Unit (1 x 1) patches.
    pub cells: Vec<RefinedCell>,
    /// Zero-area (1 x 0) patches, as the pair of unit edges bounding them.
    pub zero_cells: Vec<[usize; 2]>,
}

#[derive(Debug, Clone)]
pub struct RefinedEdge {
    pub v: [usize; 2],
    /// Quantized length 1; false for collapsed (length zero) edges.
    pub unit: bool,
    pub feature: Option<usize>,
    /// Input vertex path this edge descends from, when it lies on an arc.
    /// Used as the embedding hint for closed loops and feature direction.
    pub path: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct RefinedCell {
    /// Side edge ids, counter-clockwise from the bottom.
    pub sides: [usize; 4],
    /// Whether side k traverses its edge in stored path order.
    pub forward: [bool; 4],
    /// Corner refined vertices; representatives when several coincide.
    pub verts: [usize; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutClass {
    Corner,
    OnCurve(usize),
    Interior,
}

#[derive(Debug, Clone)]
pub struct LayoutVertex {
    /// Input vertices merged into this one (sorted, deduplicated).
    pub group: Vec<usize>,
    /// Representative input vertex, chosen by `place`.
    pub center: usize,
    pub class: LayoutClass,
}

#[derive(Debug, Clone)]
pub struct LayoutEdge {
    pub v: [usize; 2],
    pub feature: Option<usize>,
    /// Embedded input vertex path from center(v[0]) to center(v[1]);
    /// filled by `place`.
    pub path: Vec<usize>,
    /// Source arc sub-path from `split`, before re-embedding.
    pub(crate) hint: Vec<usize>,
}

/// One coarse quad. Sides are single edges; side k runs from corner k to
/// corner (k + 1) % 4.
#[derive(Debug, Clone)]
pub struct LayoutPatch {
    pub sides: [usize; 4],
    pub forward: [bool; 4],
    pub corners: [usize; 4],
}

#[derive(Debug, Clone)]
pub struct CoarseLayout {
    pub vertices: Vec<LayoutVertex>,
    pub edges: Vec<LayoutEdge>,
    pub patches: Vec<LayoutPatch>,
    pub embedded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FineKind {
    Corner,
    Curve(usize),
    Surface,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoopStats {
    pub loops: usize,
    pub open_chains: usize,
    /// Loops passing through some patch in both directions.
    pub self_crossing: usize,
}

/// Fine mesh from `subdivide`: every coarse patch filled with a grid of
/// quads, conforming across patch borders.
#[derive(Debug, Clone)]
pub struct BlockStructuredMesh {
    pub vertices: Vec<Vec3>,
    pub quads: Vec<[usize; 4]>,
    /// Owning layout patch and (u, v) grid cell per fine quad.
    pub quad_patch: Vec<(usize, usize, usize)>,
    /// Subdivision count per layout edge.
    pub edge_subdiv: Vec<usize>,
    pub vertex_kind: Vec<FineKind>,
    pub loop_stats: LoopStats,
    pub(crate) feature_segments: Vec<(usize, usize, usize)>,
    pub(crate) corner_fids: Vec<(usize, usize)>,
    /// Fine vertex chain per layout edge, from edge.v[0] to edge.v[1].
    pub(crate) edge_fids: Vec<Vec<usize>>,
}

/// Full extraction: split, merge, place, subdivide.
pub fn extract(
    mesh: &QuadMesh,
    tmesh: &TMesh,
    q: &[i64],
) -> Result<(CoarseLayout, BlockStructuredMesh), ExtractError> {
    let refined = split(mesh, tmesh, q);
    let layout = place(merge(&refined)?, mesh)?;
    let block = subdivide(&layout, mesh);
    Ok((layout, block))
}

/// Union-find with path halving; the smaller id wins as root, so roots are
/// their component's minimum.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl CoarseLayout {
    /// Incident edge slots at a layout vertex; a closed loop edge counts
    /// twice.
    pub fn valence(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.v[0] == v) as usize + (e.v[1] == v) as usize)
            .sum()
    }

    /// Structural and embedding self-check used by tests and callers.
    pub fn check_invariants(&self, mesh: &QuadMesh) -> Result<(), String> {
        let mut slots = vec![0usize; self.edges.len()];
        for (p, patch) in self.patches.iter().enumerate() {
            for k in 0..4 {
                let e = patch.sides[k];
                if e >= self.edges.len() {
                    return Err(format!("patch {p} references missing edge {e}"));
                }
                slots[e] += 1;
                let ev = self.edges[e].v;
                let (start, end) = if patch.forward[k] { (ev[0], ev[1]) } else { (ev[1], ev[0]) };
                if start != patch.corners[k] || end != patch.corners[(k + 1) % 4] {
                    return Err(format!("patch {p} side {k} does not join its corners"));
                }
            }
        }
        for (e, &n) in slots.iter().enumerate() {
            if n > 2 {
                return Err(format!("edge {e} borders {n} patch sides"));
            }
        }
        if !self.embedded {
            return Ok(());
        }

        for (i, v) in self.vertices.iter().enumerate() {
            if !v.group.contains(&v.center) {
                return Err(format!("vertex {i} center is outside its group"));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.path.len() < 2 {
                return Err(format!("edge {i} has a degenerate embedded path"));
            }
            let (c0, c1) =
                (self.vertices[e.v[0]].center, self.vertices[e.v[1]].center);
            if e.path[0] != c0 || *e.path.last().unwrap() != c1 {
                return Err(format!("edge {i} path does not join its centers"));
            }
            for w in e.path.windows(2) {
                let Some(me) = mesh.edge_between(w[0], w[1]) else {
                    return Err(format!("edge {i} path leaves the mesh edge graph"));
                };
                match e.feature {
                    Some(c) => {
                        if mesh.feature_curve_of(me) != Some(c) {
                            return Err(format!("feature edge {i} strays off curve {c}"));
                        }
                    }
                    None => {
                        if mesh.is_feature_edge(me) {
                            return Err(format!("edge {i} runs along a feature curve"));
                        }
                    }
                }
            }
            if e.feature.is_none() {
                for &v in &e.path[1..e.path.len() - 1] {
                    if mesh.is_on_feature(v) {
                        return Err(format!("edge {i} crosses a feature curve at {v}"));
                    }
                }
            }
        }

        // Every input corner survives as a layout vertex.
        let centers: BTreeSet<usize> = self.vertices.iter().map(|v| v.center).collect();
        for (&c, _) in mesh.corners() {
            if !centers.contains(&c) {
                return Err(format!("input corner {c} is not a layout vertex"));
            }
        }
        // Every feature curve edge is covered by some feature-flagged layout
        // edge path.
        let mut covered: BTreeSet<(usize, usize)> = BTreeSet::new();
        for e in &self.edges {
            if e.feature.is_some() {
                for w in e.path.windows(2) {
                    covered.insert((w[0].min(w[1]), w[0].max(w[1])));
                }
            }
        }
        for (&c, curve) in mesh.curves() {
            let n = curve.vertices.len();
            let pairs = if curve.closed { n } else { n - 1 };
            for k in 0..pairs {
                let (a, b) = (curve.vertices[k], curve.vertices[(k + 1) % n]);
                if !covered.contains(&(a.min(b), a.max(b))) {
                    return Err(format!("curve {c} edge ({a}, {b}) lost its cover"));
                }
            }
        }

        // Merging must not drag an off-curve irregular vertex onto a curve,
        // except a collapsed 3-5 remnant, which is regular in total.
        let classes = classify_vertices(mesh);
        for (i, v) in self.vertices.iter().enumerate() {
            if !v.group.iter().any(|&a| mesh.is_on_feature(a)) {
                continue;
            }
            let off_irr: Vec<usize> = v
                .group
                .iter()
                .copied()
                .filter(|&a| !mesh.is_on_feature(a) && classes[a].is_irregular())
                .collect();
            if off_irr.is_empty() {
                continue;
            }
            let dev: i64 = off_irr
                .iter()
                .map(|&a| classes[a].valence as i64 - 4)
                .sum();
            if dev != 0 {
                return Err(format!(
                    "vertex {i} merges off-curve irregular vertices {off_irr:?} onto a curve"
                ));
            }
        }
        Ok(())
    }
}

impl BlockStructuredMesh {
    /// Rebuilds a full mesh (adjacency, feature tags, corners) from the fine
    /// quads. Fails if the fine mesh is non-manifold or inconsistently
    /// oriented, which would mean extraction broke conformity.
    pub fn to_quad_mesh(&self) -> Result<QuadMesh, MeshError> {
        QuadMesh::from_parts(
            self.vertices.clone(),
            self.quads.clone(),
            self.feature_segments.clone(),
            self.corner_fids.clone(),
        )
    }

    pub fn check_invariants(
        &self,
        layout: &CoarseLayout,
        mesh: &QuadMesh,
    ) -> Result<(), String> {
        if self.edge_subdiv.len() != layout.edges.len() {
            return Err("subdivision counts do not cover the layout edges".into());
        }
        let mut per_patch = vec![0usize; layout.patches.len()];
        for &(p, u, v) in &self.quad_patch {
            if p >= layout.patches.len() {
                return Err(format!("fine quad maps to missing patch {p}"));
            }
            let (wu, wv) =
                (self.edge_subdiv[layout.patches[p].sides[0]], self.edge_subdiv[layout.patches[p].sides[1]]);
            if u >= wu || v >= wv {
                return Err(format!("fine quad grid position ({u}, {v}) overflows patch {p}"));
            }
            per_patch[p] += 1;
        }
        for (p, patch) in layout.patches.iter().enumerate() {
            let s = patch.sides;
            if self.edge_subdiv[s[0]] != self.edge_subdiv[s[2]]
                || self.edge_subdiv[s[1]] != self.edge_subdiv[s[3]]
            {
                return Err(format!("patch {p} opposite sides disagree on subdivision"));
            }
            if per_patch[p] != self.edge_subdiv[s[0]] * self.edge_subdiv[s[1]] {
                return Err(format!(
                    "patch {p} holds {} fine quads, expected {}",
                    per_patch[p],
                    self.edge_subdiv[s[0]] * self.edge_subdiv[s[1]]
                ));
            }
        }
        if self.quad_patch.len() != self.quads.len() {
            return Err("patch map does not cover the fine quads".into());
        }
        if self.quads.is_empty() {
            return Ok(());
        }

        let fine = self.to_quad_mesh().map_err(|e| format!("fine mesh rejected: {e}"))?;
        // A hanging node at a patch border would show up as an unmatched
        // fine edge with plain surface endpoints.
        for e in 0..fine.edge_count() {
            if fine.is_boundary_edge(e) {
                let [a, b] = fine.edge(e).v;
                for v in [a, b] {
                    if self.vertex_kind[v] == FineKind::Surface {
                        return Err(format!("interior fine edge ({a}, {b}) is unmatched"));
                    }
                }
            }
        }
        // Curve vertices sit on their curve's polyline.
        let scale = mesh.mean_edge_len();
        for (v, kind) in self.vertex_kind.iter().enumerate() {
            if let FineKind::Curve(c) = kind {
                let curve = &mesh.curves()[c];
                let n = curve.vertices.len();
                let segs = if curve.closed { n } else { n - 1 };
                let p = self.vertices[v];
                let mut best = f64::INFINITY;
                for k in 0..segs {
                    let a = mesh.position(curve.vertices[k]);
                    let b = mesh.position(curve.vertices[(k + 1) % n]);
                    best = best.min(dist_to_segment(p, a, b));
                }
                if best > 1e-9 * scale.max(1.0) {
                    return Err(format!("fine vertex {v} is off curve {c} by {best:e}"));
                }
            }
        }
        Ok(())
    }
}

fn dist_to_segment(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Text dump of an embedded layout, used by golden-file tests and the
/// artifact dumps.
pub fn dump_layout(layout: &CoarseLayout) -> String {
    use std::fmt::Write;
    assert!(layout.embedded, "dump requires an embedded layout");
    let mut out = String::new();
    out.push_str("quadcoarse-layout v1\n");
    writeln!(out, "vertices {}", layout.vertices.len()).unwrap();
    for (i, v) in layout.vertices.iter().enumerate() {
        let class = match v.class {
            LayoutClass::Corner => "corner".into(),
            LayoutClass::OnCurve(c) => format!("curve {c}"),
            LayoutClass::Interior => "interior".into(),
        };
        writeln!(out, "{} {} {}", i, v.center, class).unwrap();
    }
    writeln!(out, "edges {}", layout.edges.len()).unwrap();
    for (i, e) in layout.edges.iter().enumerate() {
        let f = e.feature.map(|c| format!("f{c}")).unwrap_or_else(|| "-".into());
        let path: Vec<String> = e.path.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{} {} {} {} {}", i, e.v[0], e.v[1], f, path.join(" ")).unwrap();
    }
    writeln!(out, "patches {}", layout.patches.len()).unwrap();
    for (p, patch) in layout.patches.iter().enumerate() {
        let sides: Vec<String> = (0..4)
            .map(|k| format!("{}{}", if patch.forward[k] { "+" } else { "-" }, patch.sides[k]))
            .collect();
        let corners: Vec<String> = patch.corners.iter().map(|c| c.to_string()).collect();
        writeln!(out, "p{} {} corners {}", p, sides.join(" "), corners.join(" ")).unwrap();
    }
    out
}
