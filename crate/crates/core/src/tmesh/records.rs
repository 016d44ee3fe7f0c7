//! Post-hoc intersection analysis of the final trace set: one ordered record
//! per crossing, terminal contacts on seeds, and per trace the first contact
//! inside its π/4 cone.

use std::collections::BTreeMap;

use crate::mesh::{classify_vertices, QuadMesh};

use super::build::{touch_edges, transversal};
use super::{
    seed_vertices, IntersectionRecord, TerminalRecord, TMesh, Trace, TraceIntersections,
    ValidityPick,
};

pub fn intersection_records(
    mesh: &QuadMesh,
    tmesh: &TMesh,
    traces: &[Trace],
    alpha: f64,
) -> TraceIntersections {
    let classes = classify_vertices(mesh);
    let seeds = seed_vertices(mesh, &classes);
    let tan_alpha = alpha.tan();

    let mut occurrences: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (t, tr) in traces.iter().enumerate() {
        for (p, &v) in tr.vertex_path.iter().enumerate() {
            occurrences.entry(v).or_default().push((t, p));
        }
    }

    let mut records = Vec::new();
    let mut by_trace: Vec<Vec<usize>> = vec![Vec::new(); traces.len()];
    for (&v, occ) in &occurrences {
        if occ.len() < 2 {
            continue;
        }
        // Traces stop on seeds, so every contact here is an arrival at the
        // seed: terminal territory, handled below, not a crossing.
        if seeds.contains(&v) {
            continue;
        }
        let Some(n) = tmesh.node_at_vertex(v) else {
            continue;
        };
        for (k, &(t1, p1)) in occ.iter().enumerate() {
            for &(t2, p2) in &occ[k + 1..] {
                // Origin contacts (position 0) are terminal territory, not
                // crossings; both distances of a record are ≥ 1.
                if p1 == 0 || p2 == 0 {
                    continue;
                }
                let e1 = touch_edges(&traces[t1], p1);
                let e2 = touch_edges(&traces[t2], p2);
                if !transversal(e1, e2) {
                    continue;
                }
                for ((ta, pa), (tb, pb)) in [((t1, p1), (t2, p2)), ((t2, p2), (t1, p1))] {
                    by_trace[ta].push(records.len());
                    records.push(make_record(tmesh, traces, tan_alpha, ta, pa, tb, pb, n));
                }
            }
        }
    }

    let mut terminals = Vec::new();
    let mut validity = Vec::with_capacity(traces.len());
    for (t, tr) in traces.iter().enumerate() {
        let end = tr.end();
        let terminal = seeds.contains(&end).then(|| TerminalRecord {
            trace: t,
            origin: tmesh.node_at_vertex(tr.origin).expect("origin is a node"),
            end: tmesh.node_at_vertex(end).expect("seed is a node"),
            len: tr.len(),
        });

        // First π/4 contact: crossings whose source is a different origin,
        // plus the terminal seed contact (source distance 0, inside any
        // cone). A closed run's terminal is its own origin; keeping it is
        // what stops an anchored feature loop from collapsing to nothing.
        let mut best: Option<(usize, usize, usize, usize)> = None; // (l_i, l_star, star, node)
        for &r in &by_trace[t] {
            let rec = &records[r];
            if !rec.in_pi4_cone_of_i || rec.j == rec.i {
                continue;
            }
            let cand = (rec.l_ij, rec.l_ji, rec.j, rec.n);
            if best.map_or(true, |b| cand < b) {
                best = Some(cand);
            }
        }
        if let Some(term) = &terminal {
            let cand = (term.len, 0, term.end, term.end);
            if best.map_or(true, |b| cand < b) {
                best = Some(cand);
            }
        }
        validity.push(best.map(|(l_i, l_star, star, node)| ValidityPick {
            node,
            star,
            arcs: tmesh.arcs_to(tr, t, l_i),
            l_i,
            l_star,
        }));
        if let Some(term) = terminal {
            terminals.push(term);
        }
    }

    TraceIntersections { records, terminals, validity }
}

/// Cone membership of a contact at integer distances l_ij (along the owner)
/// and l_ji (along the other trace). The owner's half-angle enters through
/// its tangent; feature traces pass 0 and admit only distance-zero contacts.
pub(super) fn cone_flags(l_ij: usize, l_ji: usize, tan_alpha_i: f64) -> (bool, bool) {
    let in_cone = l_ji as f64 <= l_ij as f64 * tan_alpha_i + 1e-9;
    (in_cone, l_ji <= l_ij)
}

#[allow(clippy::too_many_arguments)]
fn make_record(
    tmesh: &TMesh,
    traces: &[Trace],
    tan_alpha: f64,
    ti: usize,
    pi: usize,
    tj: usize,
    pj: usize,
    n: usize,
) -> IntersectionRecord {
    let tr_i = &traces[ti];
    let tr_j = &traces[tj];
    let alpha_i_tan = if tr_i.on_feature.is_some() { 0.0 } else { tan_alpha };
    let (in_cone_of_i, in_pi4_cone_of_i) = cone_flags(pi, pj, alpha_i_tan);
    IntersectionRecord {
        i: tmesh.node_at_vertex(tr_i.origin).expect("origin is a node"),
        j: tmesh.node_at_vertex(tr_j.origin).expect("origin is a node"),
        n,
        l_ij: pi,
        l_ji: pj,
        s_ij: tmesh.arcs_to(tr_i, ti, pi),
        s_ji: tmesh.arcs_to(tr_j, tj, pj),
        in_cone_of_i,
        in_pi4_cone_of_i,
    }
}
