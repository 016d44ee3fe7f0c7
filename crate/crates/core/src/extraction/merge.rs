//! Contraction of the zero-length structure left by `split`.
//!
//! Vertices joined by zero-length edges become one layout vertex. The two
//! unit edges bounding a zero-area cell become one layout edge; classes can
//! chain through stacked ribbons. Purely topological; centers and embedded
//! paths are chosen by `place`.

use std::collections::{BTreeMap, BTreeSet};

use super::{CoarseLayout, LayoutClass, LayoutEdge, LayoutPatch, LayoutVertex, RefinedLayout, UnionFind};
use crate::error::ExtractError;

pub fn merge(refined: &RefinedLayout) -> Result<CoarseLayout, ExtractError> {
    let mut vuf = UnionFind::new(refined.anchors.len());
    for e in &refined.edges {
        if !e.unit {
            vuf.union(e.v[0], e.v[1]);
        }
    }
    let mut euf = UnionFind::new(refined.edges.len());
    for pair in &refined.zero_cells {
        euf.union(pair[0], pair[1]);
    }

    // Two sides of a positive cell collapsing into one edge means the
    // quantization pinched the surface. Sides sharing an edge id already in
    // the T-mesh (a patch glued to itself) are fine.
    for (ci, cell) in refined.cells.iter().enumerate() {
        for i in 0..4 {
            for j in i + 1..4 {
                let (a, b) = (cell.sides[i], cell.sides[j]);
                if a != b && euf.find(a) == euf.find(b) {
                    return Err(ExtractError::TopologyCollapse(format!(
                        "sides {i} and {j} of unit patch {ci} merge into one edge"
                    )));
                }
            }
        }
    }

    // Anchors per vertex group, keyed by the group root.
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..refined.anchors.len() {
        members.entry(vuf.find(v)).or_default().push(refined.anchors[v]);
    }
    // Only groups on a surviving unit edge become layout vertices.
    let mut used_roots: BTreeSet<usize> = BTreeSet::new();
    for e in &refined.edges {
        if e.unit {
            used_roots.insert(vuf.find(e.v[0]));
            used_roots.insert(vuf.find(e.v[1]));
        }
    }
    let mut gid: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vertices: Vec<LayoutVertex> = Vec::new();
    for &root in &used_roots {
        let mut group = members[&root].clone();
        group.sort_unstable();
        group.dedup();
        gid.insert(root, vertices.len());
        vertices.push(LayoutVertex { group, center: usize::MAX, class: LayoutClass::Interior });
    }

    // Edge classes in order of their smallest member. The geometry donor is
    // the feature member with the lowest curve id when there is one, so a
    // boundary edge merged with an interior one keeps its curve.
    let mut class_members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (ei, e) in refined.edges.iter().enumerate() {
        if e.unit {
            class_members.entry(euf.find(ei)).or_default().push(ei);
        }
    }
    let mut edge_of_refined: BTreeMap<usize, usize> = BTreeMap::new();
    let mut edges: Vec<LayoutEdge> = Vec::new();
    for ms in class_members.values() {
        let &src = ms
            .iter()
            .min_by_key(|&&m| match refined.edges[m].feature {
                Some(c) => (0usize, c, m),
                None => (1, 0, m),
            })
            .unwrap();
        let se = &refined.edges[src];
        let v = [gid[&vuf.find(se.v[0])], gid[&vuf.find(se.v[1])]];
        debug_assert!(ms.iter().all(|&m| {
            let mv = &refined.edges[m].v;
            let got = [gid[&vuf.find(mv[0])], gid[&vuf.find(mv[1])]];
            got == v || got == [v[1], v[0]]
        }));
        for &m in ms {
            edge_of_refined.insert(m, edges.len());
        }
        edges.push(LayoutEdge { v, feature: se.feature, path: Vec::new(), hint: se.path.clone() });
    }

    let mut patches: Vec<LayoutPatch> = Vec::with_capacity(refined.cells.len());
    for cell in &refined.cells {
        let sides = cell.sides.map(|e| edge_of_refined[&e]);
        let mut forward = [true; 4];
        for k in 0..4 {
            let re = &refined.edges[cell.sides[k]];
            let fe = &edges[sides[k]];
            forward[k] = if fe.v[0] == fe.v[1] {
                // Closed loop edge: orientation lives in the stored path,
                // which is the refined edge's own (classes are singletons).
                cell.forward[k]
            } else {
                let start = if cell.forward[k] { re.v[0] } else { re.v[1] };
                gid[&vuf.find(start)] == fe.v[0]
            };
        }
        let corners = cell.verts.map(|v| gid[&vuf.find(v)]);
        patches.push(LayoutPatch { sides, forward, corners });
    }

    Ok(CoarseLayout { vertices, edges, patches, embedded: false })
}
