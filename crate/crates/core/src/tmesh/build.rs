//! T-mesh assembly: nodes where traces meet, arcs between nodes, and the
//! quadrilateral patches bounded by arcs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::TraceError;
use crate::mesh::{classify_vertices, Halfedge, QuadMesh};

use super::{seed_vertices, Arc, NodeKind, Patch, SideArc, TMesh, TMeshNode, Trace};

/// Where a trace touches a vertex: the mesh edges it arrives and leaves by.
/// Two touches are transversal when these edge sets are disjoint, which works
/// at any valence (a collinear pass shares an edge with the other run).
pub(super) fn touch_edges(trace: &Trace, pos: usize) -> [Option<usize>; 2] {
    let entry = if pos > 0 { Some(trace.edge_path[pos - 1]) } else { None };
    let exit = trace.edge_path.get(pos).copied();
    [entry, exit]
}

pub(super) fn transversal(a: [Option<usize>; 2], b: [Option<usize>; 2]) -> bool {
    a.iter()
        .flatten()
        .all(|e| !b.iter().flatten().any(|f| f == e))
}

pub fn build_tmesh(mesh: &QuadMesh, traces: &[Trace]) -> Result<TMesh, TraceError> {
    let classes = classify_vertices(mesh);
    let seeds = seed_vertices(mesh, &classes);

    // vertex -> every (trace, path position) that touches it.
    let mut occurrences: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (t, tr) in traces.iter().enumerate() {
        for (p, &v) in tr.vertex_path.iter().enumerate() {
            occurrences.entry(v).or_default().push((t, p));
        }
    }

    let mut node_vertices: BTreeSet<usize> = seeds.clone();
    for tr in traces {
        node_vertices.insert(tr.end());
    }
    for (&v, occ) in &occurrences {
        if node_vertices.contains(&v) || occ.len() < 2 {
            continue;
        }
        let cross = occ.iter().enumerate().any(|(k, &(t1, p1))| {
            occ[k + 1..].iter().any(|&(t2, p2)| {
                transversal(touch_edges(&traces[t1], p1), touch_edges(&traces[t2], p2))
            })
        });
        if cross {
            node_vertices.insert(v);
        }
    }
    for &s in &seeds {
        debug_assert!(occurrences.contains_key(&s), "seed {s} not on any trace");
    }

    let mut node_of_vertex = BTreeMap::new();
    let mut nodes = Vec::new();
    for &v in &node_vertices {
        let ends_here = occurrences
            .get(&v)
            .is_some_and(|occ| occ.iter().any(|&(t, p)| p == traces[t].len() && p > 0));
        let kind = if mesh.corner_nominal(v).is_some() {
            NodeKind::Corner
        } else if classes[v].is_irregular() {
            NodeKind::Irregular
        } else if seeds.contains(&v) {
            // Artificial anchor on a closed feature loop.
            NodeKind::Corner
        } else if ends_here {
            NodeKind::TJunction
        } else {
            NodeKind::Crossing
        };
        node_of_vertex.insert(v, nodes.len());
        nodes.push(TMeshNode { vertex: v, kind });
    }

    // Slice traces into arcs at node vertices. Overlapping runs produce
    // identical slices (nodes are global), deduplicated by canonical path.
    let mut arcs: Vec<Arc> = Vec::new();
    let mut arc_ids: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut arc_of_edge: HashMap<usize, usize> = HashMap::new();
    let mut trace_nodes: Vec<Vec<(usize, usize)>> = Vec::new();
    for tr in traces {
        let positions: Vec<usize> = tr
            .vertex_path
            .iter()
            .enumerate()
            .filter(|(_, v)| node_vertices.contains(v))
            .map(|(p, _)| p)
            .collect();
        debug_assert_eq!(positions.first(), Some(&0));
        debug_assert_eq!(positions.last(), Some(&tr.len()));
        trace_nodes.push(
            positions
                .iter()
                .map(|&p| (p, node_of_vertex[&tr.vertex_path[p]]))
                .collect(),
        );
        for w in positions.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut vpath = tr.vertex_path[a..=b].to_vec();
            let mut epath = tr.edge_path[a..b].to_vec();
            let flip = if vpath[0] != *vpath.last().unwrap() {
                vpath[0] > *vpath.last().unwrap()
            } else {
                vpath.len() > 2 && vpath[1] > vpath[vpath.len() - 2]
            };
            if flip {
                vpath.reverse();
                epath.reverse();
            }
            let id = match arc_ids.get(&vpath) {
                Some(&id) => id,
                None => {
                    let id = arcs.len();
                    arc_ids.insert(vpath.clone(), id);
                    arcs.push(Arc {
                        nodes: [
                            node_of_vertex[&vpath[0]],
                            node_of_vertex[vpath.last().unwrap()],
                        ],
                        vertex_path: vpath,
                        edge_path: epath.clone(),
                        on_feature: tr.on_feature,
                    });
                    id
                }
            };
            for &e in &epath {
                if let Some(&prev) = arc_of_edge.get(&e) {
                    if prev != id {
                        return Err(TraceError::InvalidParam(format!(
                            "internal: mesh edge {e} claimed by arcs {prev} and {id}"
                        )));
                    }
                } else {
                    arc_of_edge.insert(e, id);
                }
            }
        }
    }

    let (patches, patch_of_quad) =
        build_patches(mesh, &arcs, &arc_of_edge, &node_of_vertex)?;

    let tmesh = TMesh {
        nodes,
        arcs,
        patches,
        patch_of_quad,
        node_of_vertex,
        arc_of_edge,
        trace_nodes,
    };
    tmesh
        .check_invariants(mesh)
        .map_err(|m| TraceError::InvalidParam(format!("internal: {m}")))?;
    Ok(tmesh)
}

/// Floods quads between arcs into regions and walks each region boundary,
/// splitting it into four sides at the 90-degree turns.
fn build_patches(
    mesh: &QuadMesh,
    arcs: &[Arc],
    arc_of_edge: &HashMap<usize, usize>,
    node_of_vertex: &BTreeMap<usize, usize>,
) -> Result<(Vec<Patch>, Vec<usize>), TraceError> {
    let is_arc = |e: usize| arc_of_edge.contains_key(&e);

    let mut patch_of_quad = vec![usize::MAX; mesh.quad_count()];
    let mut region_count = 0;
    for q0 in 0..mesh.quad_count() {
        if patch_of_quad[q0] != usize::MAX {
            continue;
        }
        let id = region_count;
        region_count += 1;
        let mut stack = vec![q0];
        patch_of_quad[q0] = id;
        while let Some(q) = stack.pop() {
            for side in 0..4 {
                let h = Halfedge { quad: q, side };
                if is_arc(mesh.he_edge(h)) {
                    continue;
                }
                let t = mesh.twin(h).ok_or_else(|| {
                    TraceError::InvalidParam(format!(
                        "internal: boundary edge {} carries no arc",
                        mesh.he_edge(h)
                    ))
                })?;
                if patch_of_quad[t.quad] == usize::MAX {
                    patch_of_quad[t.quad] = id;
                    stack.push(t.quad);
                }
            }
        }
    }

    // Region boundary halfedges in deterministic (quad, side) order; the
    // first one of each region starts its walk.
    let mut boundary: Vec<Vec<Halfedge>> = vec![Vec::new(); region_count];
    for q in 0..mesh.quad_count() {
        for side in 0..4 {
            let h = Halfedge { quad: q, side };
            if is_arc(mesh.he_edge(h)) {
                boundary[patch_of_quad[q]].push(h);
            }
        }
    }

    let mut patches = Vec::new();
    for (region, hes) in boundary.iter().enumerate() {
        let start = hes[0];
        let mut walk: Vec<Halfedge> = Vec::new();
        let mut corner_before: Vec<bool> = Vec::new();
        let mut cur = start;
        loop {
            walk.push(cur);
            let (next, hops) = next_boundary(mesh, cur, &is_arc, region)?;
            corner_before.push(hops == 0);
            if hops >= 2 {
                return Err(TraceError::NonQuadPatch(format!(
                    "region {region} boundary turns by {} quads at vertex {}",
                    hops + 1,
                    mesh.he_to(cur)
                )));
            }
            if next == start {
                break;
            }
            cur = next;
        }
        // corner_before[k] currently describes the turn AFTER walk[k]; shift
        // so it describes the turn at the start vertex of walk[k].
        corner_before.rotate_right(1);
        if walk.len() != hes.len() {
            return Err(TraceError::NonQuadPatch(format!(
                "region {region} boundary is not a single loop ({} of {} edges)",
                walk.len(),
                hes.len()
            )));
        }
        let corner_pos: Vec<usize> = (0..walk.len()).filter(|&k| corner_before[k]).collect();
        if corner_pos.len() != 4 {
            return Err(TraceError::NonQuadPatch(format!(
                "region {region} has {} corners",
                corner_pos.len()
            )));
        }
        let mut sides: [Vec<SideArc>; 4] = Default::default();
        let mut corner_nodes = [0usize; 4];
        for (k, window) in corner_pos.iter().enumerate() {
            let from = *window;
            let to = corner_pos[(k + 1) % 4];
            let v = mesh.he_from(walk[from]);
            corner_nodes[k] = *node_of_vertex.get(&v).ok_or_else(|| {
                TraceError::NonQuadPatch(format!(
                    "region {region} corner vertex {v} is not a node"
                ))
            })?;
            let mut run = from;
            loop {
                let h = walk[run];
                let e = mesh.he_edge(h);
                let arc = arc_of_edge[&e];
                if sides[k].last().map(|s: &SideArc| s.arc) != Some(arc) {
                    let pos = arcs[arc]
                        .edge_path
                        .iter()
                        .position(|&ae| ae == e)
                        .expect("edge in its arc");
                    let forward = arcs[arc].vertex_path[pos] == mesh.he_from(h);
                    sides[k].push(SideArc { arc, forward });
                }
                run = (run + 1) % walk.len();
                if run == to {
                    break;
                }
            }
        }
        patches.push(Patch { sides, corner_nodes });
    }
    Ok((patches, patch_of_quad))
}

/// Follows the region boundary from `h` to the next boundary halfedge around
/// the head vertex of `h`, counting how many region quads it rotates past.
/// Zero hops means the sector holds a single quad, a 90-degree patch corner.
fn next_boundary(
    mesh: &QuadMesh,
    h: Halfedge,
    is_arc: &impl Fn(usize) -> bool,
    region: usize,
) -> Result<(Halfedge, usize), TraceError> {
    let mut g = mesh.next(h);
    let mut hops = 0;
    loop {
        if is_arc(mesh.he_edge(g)) {
            if mesh.he_edge(g) == mesh.he_edge(h) {
                return Err(TraceError::NonQuadPatch(format!(
                    "region {region} boundary makes a U-turn at vertex {}",
                    mesh.he_to(h)
                )));
            }
            return Ok((g, hops));
        }
        let t = mesh.twin(g).ok_or_else(|| {
            TraceError::InvalidParam(format!(
                "internal: boundary edge {} carries no arc",
                mesh.he_edge(g)
            ))
        })?;
        g = mesh.next(t);
        hops += 1;
    }
}
