//! Lockstep trace propagation.
//!
//! All active traces advance one mesh edge per round; within a round they
//! move in (origin vertex, direction index) order, so simultaneous crossings
//! resolve deterministically. A trace leaves a trail of occupied vertices;
//! arrival checks run against the trails laid down so far.

use std::collections::{HashMap, HashSet};

use crate::error::TraceError;
use crate::mesh::{QuadMesh, VertexClass};

use super::{seed_vertices, StopReason, Trace, TraceConfig};

struct TraceState {
    origin: usize,
    dir_index: usize,
    first_edge: usize,
    on_feature: Option<usize>,
    vertex_path: Vec<usize>,
    edge_path: Vec<usize>,
    /// Directed edges already walked, as (edge, from-vertex). Guards against
    /// re-traversing a loop forever.
    walked: HashSet<(usize, usize)>,
    left: usize,
    right: usize,
    stop: Option<StopReason>,
}

impl TraceState {
    fn head(&self) -> usize {
        *self.vertex_path.last().unwrap()
    }
}

/// Propagates traces with the default one-candidate-per-side stopping rule.
pub fn propagate_traces(
    mesh: &QuadMesh,
    classes: &[VertexClass],
    alpha: f64,
) -> Result<Vec<Trace>, TraceError> {
    propagate_traces_with(mesh, classes, &TraceConfig { alpha, ..TraceConfig::default() })
}

pub fn propagate_traces_with(
    mesh: &QuadMesh,
    classes: &[VertexClass],
    cfg: &TraceConfig,
) -> Result<Vec<Trace>, TraceError> {
    if !cfg.alpha.is_finite() || cfg.alpha < 0.0 || cfg.alpha > std::f64::consts::FRAC_PI_4 + 1e-12
    {
        return Err(TraceError::InvalidParam(format!(
            "alpha must lie in [0, pi/4], got {}",
            cfg.alpha
        )));
    }
    let seeds = seed_vertices(mesh, classes);
    if seeds.is_empty() {
        return Err(TraceError::NoSeeds);
    }

    let mut states: Vec<TraceState> = Vec::new();
    for &v in &seeds {
        for (k, &e) in mesh.star(v).edges.iter().enumerate() {
            states.push(TraceState {
                origin: v,
                dir_index: k,
                first_edge: e,
                on_feature: mesh.feature_curve_of(e),
                vertex_path: vec![v],
                edge_path: Vec::new(),
                walked: HashSet::new(),
                left: 0,
                right: 0,
                stop: None,
            });
        }
    }

    let tan_alpha = cfg.alpha.tan();
    let threshold = cfg.stop_rule.threshold();
    // vertex -> (trace, path position) trail entries, in arrival order.
    let mut occupancy: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();

    let mut active = states.len();
    while active > 0 {
        for t in 0..states.len() {
            if states[t].stop.is_some() {
                continue;
            }
            let head = states[t].head();
            let next = if states[t].edge_path.is_empty() {
                Some(states[t].first_edge)
            } else {
                continuation(mesh, &states[t], head)
            };
            let Some(e) = next else {
                // A feature chain petered out without reaching a tagged
                // corner; treat the chain end like one.
                states[t].stop = Some(StopReason::HitBoundaryCorner);
                active -= 1;
                continue;
            };
            if !states[t].walked.insert((e, head)) {
                log::warn!(
                    "trace from {} dir {} closed a loop without meeting a seed",
                    states[t].origin,
                    states[t].dir_index
                );
                states[t].stop = Some(StopReason::ConeSatisfied);
                active -= 1;
                continue;
            }
            let v = mesh.edge_other(e, head);
            states[t].edge_path.push(e);
            states[t].vertex_path.push(v);
            let pos = states[t].edge_path.len();

            let stop = arrival_stop(
                mesh, &seeds, &mut states, t, v, pos, &occupancy, tan_alpha, threshold,
            );
            occupancy.entry(v).or_default().push((t, pos));
            if let Some(reason) = stop {
                states[t].stop = Some(reason);
                active -= 1;
            }
        }
    }

    let traces: Vec<Trace> = states
        .into_iter()
        .map(|s| {
            let edge = mesh.edge(s.first_edge);
            let direction = if mesh.he_from(edge.he) == s.origin {
                edge.he
            } else {
                edge.twin.unwrap_or(edge.he)
            };
            Trace {
                origin: s.origin,
                dir_index: s.dir_index,
                direction,
                edge_path: s.edge_path,
                vertex_path: s.vertex_path,
                on_feature: s.on_feature,
                stop_reason: s.stop.expect("every trace stopped"),
            }
        })
        .collect();
    Ok(dedup_opposite_runs(traces))
}

/// The edge a trace continues over after arriving at `head`, or None at the
/// end of an open feature chain.
fn continuation(mesh: &QuadMesh, state: &TraceState, head: usize) -> Option<usize> {
    let entry = *state.edge_path.last().unwrap();
    if let Some(curve) = state.on_feature {
        return mesh
            .star(head)
            .edges
            .iter()
            .copied()
            .find(|&e| e != entry && mesh.feature_curve_of(e) == Some(curve));
    }
    // Interior continuation is the opposite star edge; any vertex a
    // non-feature trace passes through is interior with exactly 4 quads.
    let star = mesh.star(head);
    debug_assert!(star.closed && star.edges.len() == 4);
    let i = mesh.star_index(head, entry).expect("entry edge in star");
    Some(star.edges[(i + 2) % star.edges.len()])
}

/// Stop decision on arriving at `v`. Also updates the cone tallies of the
/// arriving trace.
#[allow(clippy::too_many_arguments)]
fn arrival_stop(
    mesh: &QuadMesh,
    seeds: &std::collections::BTreeSet<usize>,
    states: &mut [TraceState],
    t: usize,
    v: usize,
    pos: usize,
    occupancy: &HashMap<usize, Vec<(usize, usize)>>,
    tan_alpha: f64,
    threshold: usize,
) -> Option<StopReason> {
    if seeds.contains(&v) {
        return Some(if mesh.corner_nominal(v).is_some() {
            StopReason::HitBoundaryCorner
        } else {
            StopReason::HitIrregular
        });
    }
    if states[t].on_feature.is_some() {
        return None;
    }
    if mesh.is_boundary_vertex(v) {
        return Some(StopReason::HitBoundaryCorner);
    }
    let Some(entries) = occupancy.get(&v) else {
        return None;
    };
    let my_entry = *states[t].edge_path.last().unwrap();
    let star = mesh.star(v);
    debug_assert!(star.closed && star.edges.len() == 4);
    let my_idx = mesh.star_index(v, my_entry).expect("entry edge in star");
    let mut gained = false;
    for &(other, opos) in entries {
        if other == t || states[other].origin == states[t].origin {
            continue;
        }
        let other_entry = states[other].edge_path[opos - 1];
        let other_idx = mesh.star_index(v, other_entry).expect("trail edge in star");
        // The crossing trace came from the +1 (right of travel) or +3 (left)
        // star direction; 0 and 2 are collinear runs, not crossings.
        let off = (other_idx + 4 - my_idx) % 4;
        let side = match off {
            1 => Side::Right,
            3 => Side::Left,
            _ => continue,
        };
        let in_cone = opos as f64 <= pos as f64 * tan_alpha + 1e-9;
        if !in_cone {
            continue;
        }
        match side {
            Side::Left => states[t].left += 1,
            Side::Right => states[t].right += 1,
        }
        gained = true;
    }
    if gained && states[t].left >= threshold && states[t].right >= threshold {
        return Some(StopReason::ConeSatisfied);
    }
    None
}

enum Side {
    Left,
    Right,
}

/// Removes runs that retrace another trace in reverse (the two growth
/// directions of one separatrix), keeping the earlier (origin, direction).
fn dedup_opposite_runs(traces: Vec<Trace>) -> Vec<Trace> {
    let mut kept: Vec<Trace> = Vec::new();
    let mut index: HashMap<(usize, usize, usize), Vec<usize>> = HashMap::new();
    for tr in traces {
        let a = tr.origin;
        let b = tr.end();
        let key = (a.min(b), a.max(b), tr.len());
        let dup = index.get(&key).is_some_and(|cands| {
            cands.iter().any(|&k| {
                let other: &Trace = &kept[k];
                other
                    .vertex_path
                    .iter()
                    .rev()
                    .eq(tr.vertex_path.iter())
            })
        });
        if dup {
            continue;
        }
        index.entry(key).or_default().push(kept.len());
        kept.push(tr);
    }
    kept
}
