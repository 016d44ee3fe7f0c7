//! Fine mesh synthesis from an embedded layout.
//!
//! Opposite patch sides chain into quad loops; every edge a loop crosses
//! gets the same subdivision width, the rounded mean of the embedded path
//! lengths along the loop. That keeps patch grids conforming by
//! construction. Each edge is resampled into equal arc-length parts and
//! each patch interior is filled with a transfinite (Coons) blend of its
//! four sides.

use std::collections::BTreeMap;

use super::{BlockStructuredMesh, CoarseLayout, FineKind, LayoutClass, LoopStats, UnionFind};
use crate::geom::Vec3;
use crate::mesh::QuadMesh;

/// Width of a quad loop: mean of the targets rounded half away from zero,
/// never below one.
pub fn loop_width(targets: &[usize]) -> usize {
    if targets.is_empty() {
        return 1;
    }
    let (s, n) = (targets.iter().sum::<usize>(), targets.len());
    ((2 * s + n) / (2 * n)).max(1)
}

/// Equal arc-length resampling of an embedded path into w parts.
fn sample_path(mesh: &QuadMesh, path: &[usize], w: usize) -> Vec<Vec3> {
    let pts: Vec<Vec3> = path.iter().map(|&v| mesh.position(v)).collect();
    if pts.len() < 2 {
        return vec![pts[0]; w + 1];
    }
    let mut cum = vec![0.0];
    for seg in pts.windows(2) {
        cum.push(cum.last().unwrap() + seg[0].dist(seg[1]));
    }
    let total = *cum.last().unwrap();
    if total == 0.0 {
        return vec![pts[0]; w + 1];
    }
    (0..=w)
        .map(|k| {
            if k == 0 {
                return pts[0];
            }
            if k == w {
                return *pts.last().unwrap();
            }
            let t = total * k as f64 / w as f64;
            let seg = cum.partition_point(|&c| c <= t).min(pts.len() - 1);
            let span = cum[seg] - cum[seg - 1];
            let f = if span > 0.0 { (t - cum[seg - 1]) / span } else { 0.0 };
            pts[seg - 1].lerp(pts[seg], f)
        })
        .collect()
}

pub fn subdivide(layout: &CoarseLayout, mesh: &QuadMesh) -> BlockStructuredMesh {
    assert!(layout.embedded, "layout must be embedded before subdivision");
    let ne = layout.edges.len();

    let mut uf = UnionFind::new(ne);
    for p in &layout.patches {
        uf.union(p.sides[0], p.sides[2]);
        uf.union(p.sides[1], p.sides[3]);
    }
    let mut targets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (e, edge) in layout.edges.iter().enumerate() {
        targets.entry(uf.find(e)).or_default().push(edge.path.len().saturating_sub(1));
    }
    let width: BTreeMap<usize, usize> =
        targets.iter().map(|(&r, t)| (r, loop_width(t))).collect();
    let edge_subdiv: Vec<usize> = (0..ne).map(|e| width[&uf.find(e)]).collect();

    let mut slots = vec![0usize; ne];
    for p in &layout.patches {
        for &s in &p.sides {
            slots[s] += 1;
        }
    }
    let mut open: BTreeMap<usize, bool> = targets.keys().map(|&r| (r, false)).collect();
    for e in 0..ne {
        if slots[e] < 2 {
            open.insert(uf.find(e), true);
        }
    }
    let mut crossing: BTreeMap<usize, bool> = targets.keys().map(|&r| (r, false)).collect();
    for p in &layout.patches {
        let (r0, r1) = (uf.find(p.sides[0]), uf.find(p.sides[1]));
        if r0 == r1 {
            crossing.insert(r0, true);
        }
    }
    let loop_stats = LoopStats {
        loops: targets.len(),
        open_chains: open.values().filter(|&&o| o).count(),
        self_crossing: crossing.values().filter(|&&c| c).count(),
    };

    let mut vertices: Vec<Vec3> = Vec::new();
    let mut vertex_kind: Vec<FineKind> = Vec::new();
    let vfid: Vec<usize> = layout
        .vertices
        .iter()
        .map(|v| {
            vertices.push(mesh.position(v.center));
            vertex_kind.push(match v.class {
                LayoutClass::Corner => FineKind::Corner,
                LayoutClass::OnCurve(c) => FineKind::Curve(c),
                LayoutClass::Interior => FineKind::Surface,
            });
            vertices.len() - 1
        })
        .collect();

    let mut edge_fids: Vec<Vec<usize>> = Vec::with_capacity(ne);
    for (e, edge) in layout.edges.iter().enumerate() {
        let w = edge_subdiv[e];
        let samples = sample_path(mesh, &edge.path, w);
        let mut fids = Vec::with_capacity(w + 1);
        fids.push(vfid[edge.v[0]]);
        for &p in &samples[1..w] {
            fids.push(vertices.len());
            vertices.push(p);
            vertex_kind.push(match edge.feature {
                Some(c) => FineKind::Curve(c),
                None => FineKind::Surface,
            });
        }
        fids.push(vfid[edge.v[1]]);
        edge_fids.push(fids);
    }

    let mut quads: Vec<[usize; 4]> = Vec::new();
    let mut quad_patch: Vec<(usize, usize, usize)> = Vec::new();
    for (pi, patch) in layout.patches.iter().enumerate() {
        let (wu, wv) = (edge_subdiv[patch.sides[0]], edge_subdiv[patch.sides[1]]);
        let oriented = |k: usize| -> Vec<usize> {
            let s = &edge_fids[patch.sides[k]];
            if patch.forward[k] {
                s.clone()
            } else {
                s.iter().rev().copied().collect()
            }
        };
        let (bot, right, top, left) = (oriented(0), oriented(1), oriented(2), oriented(3));
        let mut g = vec![vec![usize::MAX; wv + 1]; wu + 1];
        for i in 0..=wu {
            g[i][0] = bot[i];
            g[i][wv] = top[wu - i];
        }
        for j in 0..=wv {
            g[0][j] = left[wv - j];
            g[wu][j] = right[j];
        }
        let (c00, c10, c11, c01) = (
            vertices[g[0][0]],
            vertices[g[wu][0]],
            vertices[g[wu][wv]],
            vertices[g[0][wv]],
        );
        for i in 1..wu {
            for j in 1..wv {
                let (u, v) = (i as f64 / wu as f64, j as f64 / wv as f64);
                let p = vertices[g[i][0]] * (1.0 - v)
                    + vertices[g[i][wv]] * v
                    + vertices[g[0][j]] * (1.0 - u)
                    + vertices[g[wu][j]] * u
                    - (c00 * ((1.0 - u) * (1.0 - v))
                        + c10 * (u * (1.0 - v))
                        + c11 * (u * v)
                        + c01 * ((1.0 - u) * v));
                g[i][j] = vertices.len();
                vertices.push(p);
                vertex_kind.push(FineKind::Surface);
            }
        }
        for i in 0..wu {
            for j in 0..wv {
                quads.push([g[i][j], g[i + 1][j], g[i + 1][j + 1], g[i][j + 1]]);
                quad_patch.push((pi, i, j));
            }
        }
    }

    let mut feature_segments: Vec<(usize, usize, usize)> = Vec::new();
    for (e, edge) in layout.edges.iter().enumerate() {
        if let Some(c) = edge.feature {
            for w in edge_fids[e].windows(2) {
                feature_segments.push((w[0], w[1], c));
            }
        }
    }
    let corner_fids: Vec<(usize, usize)> = layout
        .vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| v.class == LayoutClass::Corner)
        .map(|(i, v)| (vfid[i], mesh.corner_nominal(v.center).unwrap_or(1)))
        .collect();

    BlockStructuredMesh {
        vertices,
        quads,
        quad_patch,
        edge_subdiv,
        vertex_kind,
        loop_stats,
        feature_segments,
        corner_fids,
        edge_fids,
    }
}
