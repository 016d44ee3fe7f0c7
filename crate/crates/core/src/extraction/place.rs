//! Embedding of the merged layout on the input mesh.
//!
//! Each vertex group gets a center: a CAD corner if the group has one, else
//! an on-curve vertex, else its lowest vertex id. Feature edges follow their
//! curve's polyline between the centers; other edges take the shortest
//! euclidean path, kept inside one CAD face by refusing to touch feature
//! curves away from the endpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{CoarseLayout, LayoutClass};
use crate::error::ExtractError;
use crate::mesh::QuadMesh;

pub(crate) fn pick_center(mesh: &QuadMesh, group: &[usize]) -> (usize, LayoutClass) {
    if let Some(&c) = group.iter().find(|&&v| mesh.corner_nominal(v).is_some()) {
        return (c, LayoutClass::Corner);
    }
    if let Some(&c) = group.iter().find(|&&v| mesh.is_on_feature(v)) {
        let curve = mesh
            .star(c)
            .edges
            .iter()
            .filter_map(|&e| mesh.feature_curve_of(e))
            .min()
            .expect("on-curve vertex without feature edges");
        return (c, LayoutClass::OnCurve(curve));
    }
    (group[0], LayoutClass::Interior)
}

pub fn place(mut layout: CoarseLayout, mesh: &QuadMesh) -> Result<CoarseLayout, ExtractError> {
    for v in &mut layout.vertices {
        let (center, class) = pick_center(mesh, &v.group);
        v.center = center;
        v.class = class;
    }
    for i in 0..layout.edges.len() {
        let (a, b) = (
            layout.vertices[layout.edges[i].v[0]].center,
            layout.vertices[layout.edges[i].v[1]].center,
        );
        let e = &layout.edges[i];
        let path = match e.feature {
            Some(c) => curve_walk(mesh, c, a, b, &e.hint)?,
            None if a == b => {
                // A closed loop through one center; the shortest path is
                // meaningless, so keep the loop the arc traced.
                if e.hint.len() >= 2 && e.hint[0] == a && *e.hint.last().unwrap() == a {
                    e.hint.clone()
                } else {
                    return Err(ExtractError::DisconnectedPath { a, b });
                }
            }
            None => match mesh.edge_between(a, b) {
                // The direct edge is always euclidean-shortest.
                Some(de) if !mesh.is_feature_edge(de) => vec![a, b],
                _ => dijkstra(mesh, a, b, true)
                    .ok_or(ExtractError::DisconnectedPath { a, b })?,
            },
        };
        layout.edges[i].path = path;
    }
    layout.embedded = true;
    Ok(layout)
}

fn curve_walk(
    mesh: &QuadMesh,
    c: usize,
    a: usize,
    b: usize,
    hint: &[usize],
) -> Result<Vec<usize>, ExtractError> {
    let curve = &mesh.curves()[&c];
    let chain = &curve.vertices;
    let pos = |v: usize| chain.iter().position(|&x| x == v);
    let (Some(pa), Some(pb)) = (pos(a), pos(b)) else {
        // A merge pulled the center off this curve. Out of contract; fall
        // back to an unrestricted shortest path so the pipeline can finish.
        log::error!("feature edge centers ({a}, {b}) are not on curve {c}");
        if a == b {
            return Err(ExtractError::DisconnectedPath { a, b });
        }
        return dijkstra(mesh, a, b, false).ok_or(ExtractError::DisconnectedPath { a, b });
    };
    if !curve.closed {
        return Ok(if pa <= pb {
            chain[pa..=pb].to_vec()
        } else {
            chain[pb..=pa].iter().rev().copied().collect()
        });
    }
    // Closed curve: two ways around. Step the way the source arc ran.
    let n = chain.len();
    let dir: i64 = match (hint.first().and_then(|&v| pos(v)), hint.get(1).and_then(|&v| pos(v))) {
        (Some(h0), Some(h1)) if (h0 + 1) % n == h1 => 1,
        (Some(_), Some(_)) => -1,
        _ => 1,
    };
    let mut path = vec![chain[pa]];
    let mut p = pa;
    loop {
        p = (p as i64 + dir).rem_euclid(n as i64) as usize;
        path.push(chain[p]);
        if p == pb {
            break;
        }
        assert!(path.len() <= n + 1, "curve walk failed to close");
    }
    Ok(path)
}

#[derive(PartialEq)]
struct HeapItem {
    dist: f64,
    v: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the nearest vertex,
        // ties broken by id for determinism.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.v.cmp(&self.v))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest euclidean path from src to dst. When restricted, feature edges
/// are never traversed and on-curve vertices are only allowed as endpoints.
fn dijkstra(mesh: &QuadMesh, src: usize, dst: usize, restricted: bool) -> Option<Vec<usize>> {
    let n = mesh.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(HeapItem { dist: 0.0, v: src });
    while let Some(HeapItem { dist: d, v: u }) = heap.pop() {
        if u == dst {
            break;
        }
        if d > dist[u] {
            continue;
        }
        for &e in &mesh.star(u).edges {
            if restricted && mesh.is_feature_edge(e) {
                continue;
            }
            let x = mesh.edge_other(e, u);
            if restricted && x != dst && mesh.is_on_feature(x) {
                continue;
            }
            let nd = d + mesh.edge_len(e);
            if nd < dist[x] {
                dist[x] = nd;
                prev[x] = u;
                heap.push(HeapItem { dist: nd, v: x });
            }
        }
    }
    if !dist[dst].is_finite() {
        return None;
    }
    let mut path = vec![dst];
    while *path.last().unwrap() != src {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    Some(path)
}
