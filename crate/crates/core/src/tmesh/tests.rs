use std::f64::consts::FRAC_PI_4;

use super::*;
use crate::mesh::{classify_vertices, generate_test_mesh, MeshSpec, QuadMesh, VertexSite};
use crate::Vec3;

fn traced(spec: &str) -> (QuadMesh, Vec<Trace>, TMesh) {
    let mesh = generate_test_mesh(&MeshSpec::parse(spec).unwrap()).unwrap();
    let classes = classify_vertices(&mesh);
    let traces = propagate_traces(&mesh, &classes, FRAC_PI_4).unwrap();
    let tmesh = build_tmesh(&mesh, &traces).unwrap();
    tmesh.check_invariants(&mesh).unwrap();
    (mesh, traces, tmesh)
}

#[test]
fn grid_traces_and_tmesh() {
    let (_, traces, tmesh) = traced("grid(4,4)");
    // Each corner emits two boundary runs; opposite runs collapse to one
    // trace per side.
    assert_eq!(traces.len(), 4);
    for tr in &traces {
        assert_eq!(tr.len(), 4);
        assert!(tr.on_feature.is_some());
        assert_eq!(tr.stop_reason, StopReason::HitBoundaryCorner);
    }
    assert_eq!(tmesh.nodes.len(), 4);
    assert!(tmesh.nodes.iter().all(|n| n.kind == NodeKind::Corner));
    assert_eq!(tmesh.arcs.len(), 4);
    assert!(tmesh.arcs.iter().all(|a| a.len() == 4 && a.on_feature.is_some()));
    assert_eq!(tmesh.patches.len(), 1);
    for side in &tmesh.patches[0].sides {
        assert_eq!(side.len(), 1);
    }
}

#[test]
fn grid_dump_golden() {
    let (_, _, tmesh) = traced("grid(4,4)");
    let expected = "\
quadcoarse-tmesh v1
nodes 4
0 0 corner
1 4 corner
2 20 corner
3 24 corner
arcs 4
0 0 1 4 0 0 1 2 3 4
1 0 2 4 3 0 5 10 15 20
2 1 3 4 1 4 9 14 19 24
3 2 3 4 2 20 21 22 23 24
patches 1
p0 corners 0 1 3 2
p0 s0 +0
p0 s1 +2
p0 s2 -3
p0 s3 -1
";
    assert_eq!(dump_tmesh(&tmesh), expected);
}

#[test]
fn annulus_loop_anchors() {
    let (_, traces, tmesh) = traced("annulus(8,3)");
    // One run per loop plus one rung; the opposite runs deduplicate.
    assert_eq!(traces.len(), 3);
    assert_eq!(tmesh.nodes.len(), 2);
    assert!(tmesh.nodes.iter().all(|n| n.kind == NodeKind::Corner));
    let mut lens: Vec<(usize, bool)> =
        tmesh.arcs.iter().map(|a| (a.len(), a.on_feature.is_some())).collect();
    lens.sort();
    assert_eq!(lens, vec![(3, false), (8, true), (8, true)]);
    assert_eq!(tmesh.patches.len(), 1);
    let s: Vec<usize> = (0..4).map(|k| tmesh.side_initial_len(0, k)).collect();
    assert_eq!(s[0], s[2]);
    assert_eq!(s[1], s[3]);
    let mut dims = vec![s[0], s[1]];
    dims.sort();
    assert_eq!(dims, vec![3, 8]);
}

/// Three quads fanned around one interior valence-3 vertex.
fn v3_fan() -> QuadMesh {
    let mut vs = vec![Vec3::ZERO];
    for k in 0..6 {
        let th = k as f64 * std::f64::consts::PI / 3.0;
        vs.push(Vec3::new(th.cos(), th.sin(), 0.0));
    }
    let quads = vec![[0, 1, 2, 3], [0, 3, 4, 5], [0, 5, 6, 1]];
    QuadMesh::from_parts(vs, quads, Vec::new(), Vec::new()).unwrap()
}

#[test]
fn lone_interior_v3_emits_three_traces() {
    let mesh = v3_fan();
    let classes = classify_vertices(&mesh);
    assert!(classes[0].is_irregular());
    assert_eq!(classes[0].valence, 3);
    assert_eq!(classes[0].site, VertexSite::Interior);

    let traces = propagate_traces(&mesh, &classes, FRAC_PI_4).unwrap();
    let center: Vec<&Trace> = traces.iter().filter(|t| t.origin == 0).collect();
    assert_eq!(center.len(), 3);
    for tr in center {
        assert_eq!(tr.stop_reason, StopReason::HitBoundaryCorner);
        assert_eq!(tr.len(), 1);
    }

    let tmesh = build_tmesh(&mesh, &traces).unwrap();
    tmesh.check_invariants(&mesh).unwrap();
    assert_eq!(tmesh.nodes.len(), 7);
    assert_eq!(tmesh.arcs.len(), 9);
    assert_eq!(tmesh.patches.len(), 3);
    for (v, kind) in [(0, NodeKind::Irregular), (1, NodeKind::TJunction)] {
        let node = tmesh.node_at_vertex(v).unwrap();
        assert_eq!(tmesh.nodes[node].kind, kind);
    }
}

#[test]
fn ellipse_midline_and_pair_records() {
    let (mesh, traces, tmesh) = traced("ellipse_fig2");
    let classes = classify_vertices(&mesh);

    let tips: Vec<usize> = mesh.corners().keys().copied().collect();
    assert_eq!(tips.len(), 2);
    let on_midline = |v: usize| mesh.position(v).y.abs() < 1e-9;

    // The two tips connect through one interior trace running along y = 0.
    let midline = traces
        .iter()
        .find(|t| {
            t.on_feature.is_none()
                && tips.contains(&t.origin)
                && tips.contains(&t.end())
                && t.origin != t.end()
        })
        .expect("tip-to-tip trace");
    assert!(midline.vertex_path.iter().all(|&v| on_midline(v)));

    // The dislocation pair meets at distance one on both sides: two crossing
    // nodes whose records read 1/1.
    let v3 = (0..mesh.vertex_count())
        .find(|&v| classes[v].is_irregular() && classes[v].valence == 3)
        .unwrap();
    let v5 = (0..mesh.vertex_count())
        .find(|&v| classes[v].is_irregular() && classes[v].valence == 5)
        .unwrap();
    let n3 = tmesh.node_at_vertex(v3).unwrap();
    let n5 = tmesh.node_at_vertex(v5).unwrap();

    let ints = intersection_records(&mesh, &tmesh, &traces, FRAC_PI_4);
    let close: Vec<&IntersectionRecord> = ints
        .records
        .iter()
        .filter(|r| r.i == n3 && r.j == n5 && r.l_ij == 1 && r.l_ji == 1)
        .collect();
    assert_eq!(close.len(), 2);
    assert!(close.iter().all(|r| r.in_pi4_cone_of_i && r.in_cone_of_i));
    assert!(close.iter().all(|r| r.s_ij.len() == 1 && r.s_ji.len() == 1));

    // Both pair vertices pick each other as their first in-cone contact.
    let pick_of = |origin: usize, other: usize| {
        traces
            .iter()
            .enumerate()
            .filter(|(_, t)| t.origin == origin)
            .filter_map(|(i, _)| ints.validity[i].as_ref())
            .any(|p| p.star == other && p.l_i == 1)
    };
    assert!(pick_of(v3, n5));
    assert!(pick_of(v5, n3));
}

#[test]
fn disk_with_pair_tmesh_is_consistent() {
    let (mesh, traces, tmesh) = traced("disk_with_pair");
    assert!(tmesh.nodes.len() >= 6);
    let ints = intersection_records(&mesh, &tmesh, &traces, FRAC_PI_4);
    for (t, pick) in ints.validity.iter().enumerate() {
        if let Some(p) = pick {
            assert!(!p.arcs.is_empty(), "trace {t} pick has no arcs");
            assert!(p.l_i >= 1);
        }
    }
    // Every terminal contact sits on a seed node at the trace's end.
    for term in &ints.terminals {
        assert_eq!(term.len, traces[term.trace].len());
    }
}

#[test]
fn two_per_side_rule_runs_at_least_as_far() {
    let mesh = generate_test_mesh(&MeshSpec::parse("disk_with_pair").unwrap()).unwrap();
    let classes = classify_vertices(&mesh);
    let one = propagate_traces(&mesh, &classes, FRAC_PI_4).unwrap();
    let two = propagate_traces_with(
        &mesh,
        &classes,
        &TraceConfig { alpha: FRAC_PI_4, stop_rule: StopRule::TwoPerSide },
    )
    .unwrap();
    let by_dir = |ts: &[Trace]| -> std::collections::HashMap<(usize, usize), usize> {
        ts.iter().map(|t| ((t.origin, t.dir_index), t.len())).collect()
    };
    let a = by_dir(&one);
    let b = by_dir(&two);
    for (key, len_one) in &a {
        if let Some(len_two) = b.get(key) {
            assert!(len_two >= len_one, "{key:?}: {len_two} < {len_one}");
        }
    }
}

#[test]
fn never_rule_disables_cone_stops() {
    let mesh = generate_test_mesh(&MeshSpec::parse("ellipse_fig2").unwrap()).unwrap();
    let classes = classify_vertices(&mesh);
    let traces = propagate_traces_with(
        &mesh,
        &classes,
        &TraceConfig { alpha: FRAC_PI_4, stop_rule: StopRule::Never },
    )
    .unwrap();
    assert!(traces.iter().all(|t| t.stop_reason != StopReason::ConeSatisfied));
    let tmesh = build_tmesh(&mesh, &traces).unwrap();
    tmesh.check_invariants(&mesh).unwrap();
}

#[test]
fn closed_regular_mesh_has_no_seeds() {
    let (big, small, n) = (2.0f64, 1.0f64, 4usize);
    let mut vs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (
                i as f64 * std::f64::consts::TAU / n as f64,
                j as f64 * std::f64::consts::TAU / n as f64,
            );
            vs.push(Vec3::new(
                (big + small * v.cos()) * u.cos(),
                (big + small * v.cos()) * u.sin(),
                small * v.sin(),
            ));
        }
    }
    let at = |i: usize, j: usize| (i % n) * n + (j % n);
    let mut quads = Vec::new();
    for i in 0..n {
        for j in 0..n {
            quads.push([at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    let mesh = QuadMesh::from_parts(vs, quads, Vec::new(), Vec::new()).unwrap();
    let classes = classify_vertices(&mesh);
    assert!(matches!(
        propagate_traces(&mesh, &classes, FRAC_PI_4),
        Err(crate::error::TraceError::NoSeeds)
    ));
}

#[test]
fn alpha_outside_range_is_rejected() {
    let mesh = generate_test_mesh(&MeshSpec::parse("grid(4,4)").unwrap()).unwrap();
    let classes = classify_vertices(&mesh);
    for alpha in [-0.1, 1.0, f64::NAN] {
        assert!(matches!(
            propagate_traces(&mesh, &classes, alpha),
            Err(crate::error::TraceError::InvalidParam(_))
        ));
    }
}

#[test]
fn cone_flag_arithmetic() {
    let tan_pi4 = FRAC_PI_4.tan();
    // Ratio 3/2 lies outside both cones.
    let (in_cone, in_pi4) = records::cone_flags(2, 3, tan_pi4);
    assert!(!in_cone && !in_pi4);
    // The boundary case 3/3 is inside.
    let (in_cone, in_pi4) = records::cone_flags(3, 3, tan_pi4);
    assert!(in_cone && in_pi4);
    // A feature trace admits nothing at distance >= 1.
    let (in_cone, _) = records::cone_flags(10, 1, 0.0);
    assert!(!in_cone);
}
