//! Refinement of the T-mesh to unit quantized size.
//!
//! Every arc with q >= 1 becomes q unit edges; arcs with q = 0 stay as
//! explicit zero-length edges. A patch of quantized size w x h becomes a
//! w x h grid of unit cells, or w zero-area cells when h = 0 (those carry
//! the edge pairs `merge` contracts). Interior grid vertices are anchored to
//! input vertices through the patch's own structured grid, so `place` can
//! embed them later.

use super::{RefinedCell, RefinedEdge, RefinedLayout};
use crate::mesh::QuadMesh;
use crate::tmesh::{SideArc, TMesh};

/// round(k * l / q), half up, in exact integer arithmetic.
fn scaled_pos(k: usize, l: usize, q: usize) -> usize {
    (2 * k * l + q) / (2 * q)
}

struct SideChain {
    /// Unit edge ids along the side with their traversal orientation.
    units: Vec<(usize, bool)>,
    /// One representative refined vertex per integer position; zero arcs
    /// swap the representative without advancing.
    reps: Vec<usize>,
}

fn side_chain(
    side: &[SideArc],
    arc_verts: &[Vec<usize>],
    arc_units: &[Vec<usize>],
) -> SideChain {
    let mut units: Vec<(usize, bool)> = Vec::new();
    let mut reps: Vec<usize> = Vec::new();
    for sa in side {
        let vs = &arc_verts[sa.arc];
        let us = &arc_units[sa.arc];
        let (start, end) = if sa.forward {
            (vs[0], *vs.last().unwrap())
        } else {
            (*vs.last().unwrap(), vs[0])
        };
        if reps.is_empty() {
            reps.push(start);
        }
        debug_assert_eq!(*reps.last().unwrap(), start, "side chain breaks between arcs");
        if us.is_empty() {
            *reps.last_mut().unwrap() = end;
            continue;
        }
        if sa.forward {
            for (k, &u) in us.iter().enumerate() {
                units.push((u, true));
                reps.push(vs[k + 1]);
            }
        } else {
            for (k, &u) in us.iter().enumerate().rev() {
                units.push((u, false));
                reps.push(vs[k]);
            }
        }
    }
    SideChain { units, reps }
}

/// Reconstructs the structured input-vertex grid covered by a patch. The
/// boundary rows come from the side paths; the interior is filled one quad
/// completion at a time. Panics if the patch interior is not a structured
/// grid, which would mean the T-mesh is broken.
fn patch_input_grid(mesh: &QuadMesh, tmesh: &TMesh, p: usize) -> Vec<Vec<usize>> {
    let path_of_side = |s: usize| -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for sa in &tmesh.patches[p].sides[s] {
            let arc = &tmesh.arcs[sa.arc];
            let part: Vec<usize> = if sa.forward {
                arc.vertex_path.clone()
            } else {
                arc.vertex_path.iter().rev().copied().collect()
            };
            if out.is_empty() {
                out = part;
            } else {
                debug_assert_eq!(*out.last().unwrap(), part[0]);
                out.extend(&part[1..]);
            }
        }
        out
    };
    let bottom = path_of_side(0);
    let right = path_of_side(1);
    let top_rl = path_of_side(2);
    let left_tb = path_of_side(3);
    let (l0, l1) = (bottom.len() - 1, right.len() - 1);
    let mut g = vec![vec![usize::MAX; l1 + 1]; l0 + 1];
    for a in 0..=l0 {
        g[a][0] = bottom[a];
        g[a][l1] = top_rl[l0 - a];
    }
    for b in 0..=l1 {
        g[0][b] = left_tb[l1 - b];
        g[l0][b] = right[b];
    }
    for b in 1..=l1 {
        for a in 1..=l0 {
            if g[a][b] != usize::MAX {
                continue;
            }
            g[a][b] = complete_quad(mesh, g[a - 1][b - 1], g[a][b - 1], g[a - 1][b]);
        }
    }
    // The fill has to agree with the preset far boundary.
    for a in 1..=l0 {
        debug_assert_eq!(
            g[a][l1],
            complete_quad(mesh, g[a - 1][l1 - 1], g[a][l1 - 1], g[a - 1][l1]),
            "patch {p} grid does not close at the top"
        );
    }
    g
}

/// Fourth corner of the input quad containing u, x, y with u diagonal to it.
fn complete_quad(mesh: &QuadMesh, u: usize, x: usize, y: usize) -> usize {
    let e = mesh
        .edge_between(u, x)
        .unwrap_or_else(|| panic!("patch interior is not a structured grid at ({u}, {x})"));
    let edge = mesh.edge(e);
    let mut quads = vec![edge.he.quad];
    if let Some(t) = edge.twin {
        quads.push(t.quad);
    }
    for q in quads {
        let vs = mesh.quad(q);
        if vs.contains(&y) {
            return vs
                .iter()
                .copied()
                .find(|&v| v != u && v != x && v != y)
                .expect("degenerate quad");
        }
    }
    panic!("patch interior is not a structured grid around ({u}, {x}, {y})");
}

pub fn split(mesh: &QuadMesh, tmesh: &TMesh, q: &[i64]) -> RefinedLayout {
    assert_eq!(q.len(), tmesh.arcs.len(), "quantization must cover every arc");
    let mut anchors: Vec<usize> = tmesh.nodes.iter().map(|n| n.vertex).collect();
    let mut edges: Vec<RefinedEdge> = Vec::new();
    let mut arc_verts: Vec<Vec<usize>> = Vec::with_capacity(q.len());
    let mut arc_units: Vec<Vec<usize>> = Vec::with_capacity(q.len());

    for (a, arc) in tmesh.arcs.iter().enumerate() {
        assert!(q[a] >= 0, "arc {a} quantized to a negative length");
        let qa = q[a] as usize;
        if qa == 0 {
            edges.push(RefinedEdge {
                v: arc.nodes,
                unit: false,
                feature: arc.on_feature,
                path: Vec::new(),
            });
            arc_verts.push(vec![arc.nodes[0], arc.nodes[1]]);
            arc_units.push(Vec::new());
            continue;
        }
        let l = arc.len();
        let mut verts = vec![arc.nodes[0]];
        for k in 1..qa {
            verts.push(anchors.len());
            anchors.push(arc.vertex_path[scaled_pos(k, l, qa)]);
        }
        verts.push(arc.nodes[1]);
        let mut units = Vec::with_capacity(qa);
        for k in 0..qa {
            let (s, e) = (scaled_pos(k, l, qa), scaled_pos(k + 1, l, qa));
            units.push(edges.len());
            edges.push(RefinedEdge {
                v: [verts[k], verts[k + 1]],
                unit: true,
                feature: arc.on_feature,
                path: arc.vertex_path[s..=e].to_vec(),
            });
        }
        arc_verts.push(verts);
        arc_units.push(units);
    }

    let mut cells: Vec<RefinedCell> = Vec::new();
    let mut zero_cells: Vec<[usize; 2]> = Vec::new();
    for (p, patch) in tmesh.patches.iter().enumerate() {
        let chains: Vec<SideChain> = (0..4)
            .map(|k| side_chain(&patch.sides[k], &arc_verts, &arc_units))
            .collect();
        let (w, h) = (chains[0].units.len(), chains[1].units.len());
        assert_eq!(w, chains[2].units.len(), "patch {p} is quantized inconsistently");
        assert_eq!(h, chains[3].units.len(), "patch {p} is quantized inconsistently");
        if w == 0 && h == 0 {
            // Fully collapsed; the boundary zero arcs already connect it.
            continue;
        }
        if h == 0 || w == 0 {
            // A ribbon of zero-area cells: tie opposite positions together
            // with zero edges and record the edge pairs to merge.
            let (lo, hi, n) = if h == 0 { (0, 2, w) } else { (1, 3, h) };
            for a in 0..=n {
                let (r0, r1) = (chains[lo].reps[a], chains[hi].reps[n - a]);
                if r0 != r1 {
                    edges.push(RefinedEdge {
                        v: [r0, r1],
                        unit: false,
                        feature: None,
                        path: Vec::new(),
                    });
                }
            }
            for i in 0..n {
                zero_cells.push([chains[lo].units[i].0, chains[hi].units[n - 1 - i].0]);
            }
            continue;
        }

        // Positive patch: a w x h grid of unit cells. Interior vertices get
        // anchors from the structured input grid under the patch.
        let grid = patch_input_grid(mesh, tmesh, p);
        let (l0, l1) = (grid.len() - 1, grid[0].len() - 1);
        let mut gv = vec![vec![usize::MAX; h + 1]; w + 1];
        for a in 0..=w {
            for b in 0..=h {
                gv[a][b] = if b == 0 {
                    chains[0].reps[a]
                } else if b == h {
                    chains[2].reps[w - a]
                } else if a == 0 {
                    chains[3].reps[h - b]
                } else if a == w {
                    chains[1].reps[b]
                } else {
                    anchors.push(grid[scaled_pos(a, l0, w)][scaled_pos(b, l1, h)]);
                    anchors.len() - 1
                };
            }
        }
        // Interior grid edges; boundary rows and columns are the side units.
        let mut vert_e = vec![vec![usize::MAX; h]; w + 1];
        for a in 1..w {
            for b in 0..h {
                vert_e[a][b] = edges.len();
                edges.push(RefinedEdge {
                    v: [gv[a][b], gv[a][b + 1]],
                    unit: true,
                    feature: None,
                    path: Vec::new(),
                });
            }
        }
        let mut horz_e = vec![vec![usize::MAX; h + 1]; w];
        for b in 1..h {
            for a in 0..w {
                horz_e[a][b] = edges.len();
                edges.push(RefinedEdge {
                    v: [gv[a][b], gv[a + 1][b]],
                    unit: true,
                    feature: None,
                    path: Vec::new(),
                });
            }
        }
        for i in 0..w {
            for j in 0..h {
                let bottom = if j == 0 { chains[0].units[i] } else { (horz_e[i][j], true) };
                let right = if i == w - 1 { chains[1].units[j] } else { (vert_e[i + 1][j], true) };
                let top = if j == h - 1 { chains[2].units[w - 1 - i] } else { (horz_e[i][j + 1], false) };
                let left = if i == 0 { chains[3].units[h - 1 - j] } else { (vert_e[i][j], false) };
                cells.push(RefinedCell {
                    sides: [bottom.0, right.0, top.0, left.0],
                    forward: [bottom.1, right.1, top.1, left.1],
                    verts: [gv[i][j], gv[i + 1][j], gv[i + 1][j + 1], gv[i][j + 1]],
                });
            }
        }
    }

    RefinedLayout { anchors, edges, cells, zero_cells }
}
