use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_4;

use super::*;
use crate::error::HighOrderError;
use crate::extraction::extract;
use crate::ilp::{build_constraints_with, solve, QuantConfig, QuantStatus, SolveBudget};
use crate::mesh::{classify_vertices, generate_test_mesh, MeshSpec, QuadMesh};
use crate::smoothing::{default_max_iters, default_tol, winslow_smooth};
use crate::tmesh::{build_tmesh, intersection_records, propagate_traces};

fn identity_block(spec: &str) -> (QuadMesh, CoarseLayout, BlockStructuredMesh) {
    let mesh = generate_test_mesh(&MeshSpec::parse(spec).unwrap()).unwrap();
    let classes = classify_vertices(&mesh);
    let traces = propagate_traces(&mesh, &classes, FRAC_PI_4).unwrap();
    let tmesh = build_tmesh(&mesh, &traces).unwrap();
    let q: Vec<i64> = tmesh.arcs.iter().map(|a| a.len() as i64).collect();
    let (layout, block) = extract(&mesh, &tmesh, &q).unwrap();
    (mesh, layout, block)
}

fn solved_block(spec: &str) -> (QuadMesh, CoarseLayout, BlockStructuredMesh) {
    let mesh = generate_test_mesh(&MeshSpec::parse(spec).unwrap()).unwrap();
    let classes = classify_vertices(&mesh);
    let traces = propagate_traces(&mesh, &classes, FRAC_PI_4).unwrap();
    let tmesh = build_tmesh(&mesh, &traces).unwrap();
    let ints = intersection_records(&mesh, &tmesh, &traces, FRAC_PI_4);
    let model = build_constraints_with(&mesh, &tmesh, &traces, &ints, &QuantConfig::default());
    let quant = solve(&model, &SolveBudget::default());
    assert_ne!(quant.status, QuantStatus::Infeasible, "{spec} must be solvable");
    let (layout, block) = extract(&mesh, &tmesh, &quant.q).unwrap();
    (mesh, layout, block)
}

fn smoothed(spec: &str) -> (GeometryProxy, CoarseLayout, BlockStructuredMesh) {
    let (mesh, layout, block) = solved_block(spec);
    let proxy = GeometryProxy::build(&mesh);
    let (iters, tol) = (default_max_iters(&layout), default_tol(&block));
    let result = winslow_smooth(block, &proxy, iters, tol);
    assert!(result.converged);
    (proxy, layout, result.block)
}

/// All lattice coordinates across all elements, deduplicated by exact bit
/// pattern. The independent count that node sharing must reproduce.
fn brute_force_unique_coords(ho: &HighOrderMesh) -> usize {
    let mut seen: BTreeSet<[u64; 3]> = BTreeSet::new();
    for e in &ho.elements {
        for &id in e {
            let p = ho.nodes[id];
            seen.insert([p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]);
        }
    }
    seen.len()
}

#[test]
fn straight_edge_resamples_to_exact_fifths() {
    let geom = CurveGeom::from_points(
        vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)],
        false,
    );
    let fracs = lattice_params(5, Spacing::Equidistant);
    let xs: Vec<f64> = fracs[1..5].iter().map(|&f| geom.point_at(geom.total() * f).x).collect();
    assert_eq!(xs, vec![0.2, 0.4, 0.6, 0.8]);
}

#[test]
fn single_patch_edge_nodes_land_on_straight_sides() {
    let (mesh, layout, block) = solved_block("grid(2,2)");
    let proxy = GeometryProxy::build(&mesh);
    let ho = build_high_order(&block, &layout, &proxy, 5, Spacing::Equidistant).unwrap();
    assert_eq!(ho.nodes.len(), 4 + 4 * 4 + 16);

    // The bottom side runs (0,0,0) to (2,0,0); its four interior nodes cut
    // it into exact fifths even through sampling and curve projection.
    let bottom: Vec<Vec3> = ho
        .nodes
        .iter()
        .copied()
        .filter(|p| p.y == 0.0 && p.x > 0.0 && p.x < 2.0)
        .collect();
    assert_eq!(bottom.len(), 4);
    let mut xs: Vec<f64> = bottom.iter().map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    assert_eq!(xs, vec![0.4, 0.8, 1.2, 1.6]);
    assert!(bottom.iter().all(|p| p.z == 0.0));
}

#[test]
fn unit_square_patch_center_is_transfinite_center() {
    let (mesh, layout, block) = solved_block("grid(2,2)");
    let proxy = GeometryProxy::build(&mesh);
    let ho = build_high_order(&block, &layout, &proxy, 2, Spacing::Equidistant).unwrap();
    assert_eq!(ho.nodes.len(), 9);
    assert_eq!(ho.elements.len(), 1);
    // Interior nodes come last; the single one is the patch center.
    assert_eq!(ho.nodes[8], Vec3::new(1.0, 1.0, 0.0));
}

#[test]
fn order_five_element_has_full_lattice() {
    let (mesh, layout, block) = solved_block("grid(2,2)");
    let proxy = GeometryProxy::build(&mesh);
    let ho = build_high_order(&block, &layout, &proxy, 5, Spacing::Equidistant).unwrap();
    let e = &ho.elements[0];
    assert_eq!(e.len(), 36);
    let unique: BTreeSet<usize> = e.iter().copied().collect();
    assert_eq!(unique.len(), 36, "single patch shares nothing");
    // 4 vertex nodes, 16 edge nodes, 16 transfinite interior nodes.
    assert_eq!(e.iter().filter(|&&i| i < 4).count(), 4);
    assert_eq!(e.iter().filter(|&&i| (4..20).contains(&i)).count(), 16);
    assert_eq!(e.iter().filter(|&&i| i >= 20).count(), 16);
}

#[test]
fn two_adjacent_quadratic_patches_share_three_nodes() {
    let (mesh, layout, block) = identity_block("grid(2,1)");
    assert_eq!(
        (layout.vertices.len(), layout.edges.len(), layout.patches.len()),
        (6, 7, 2)
    );
    let proxy = GeometryProxy::build(&mesh);
    let ho = build_high_order(&block, &layout, &proxy, 2, Spacing::Equidistant).unwrap();
    // 18 lattice slots, minus the shared side: two corners and one edge
    // node counted once.
    assert_eq!(ho.nodes.len(), 15);
    assert_eq!(brute_force_unique_coords(&ho), 15);
    assert_eq!(ho.nodes.len(), 6 + 7 + 2);
}

#[test]
fn node_count_formula_matches_dedup_oracle() {
    for (spec, n) in [("grid(2,1)", 3), ("grid(3,2)", 2), ("grid(2,2)", 4)] {
        let (mesh, layout, block) = identity_block(spec);
        let proxy = GeometryProxy::build(&mesh);
        let ho = build_high_order(&block, &layout, &proxy, n, Spacing::Equidistant).unwrap();
        let formula = layout.vertices.len()
            + layout.edges.len() * (n - 1)
            + layout.patches.len() * (n - 1) * (n - 1);
        assert_eq!(ho.nodes.len(), formula, "{spec} n={n}");
        assert_eq!(brute_force_unique_coords(&ho), formula, "{spec} n={n}");
        for e in &ho.elements {
            assert_eq!(e.len(), (n + 1) * (n + 1));
            assert!(e.iter().all(|&i| i < ho.nodes.len()));
        }
    }
}

/// Border chain of element `e` along side `k`, in that patch's cycle
/// direction, corners included.
fn border_chain(element: &[usize], n: usize, k: usize) -> Vec<usize> {
    let at = |u: usize, v: usize| element[v * (n + 1) + u];
    match k {
        0 => (0..=n).map(|i| at(i, 0)).collect(),
        1 => (0..=n).map(|j| at(n, j)).collect(),
        2 => (0..=n).rev().map(|i| at(i, n)).collect(),
        _ => (0..=n).rev().map(|j| at(0, j)).collect(),
    }
}

#[test]
fn shared_edge_nodes_reverse_with_orientation() {
    let n = 3;
    let (mesh, layout, block) = identity_block("grid(2,1)");
    let proxy = GeometryProxy::build(&mesh);
    let ho = build_high_order(&block, &layout, &proxy, n, Spacing::Equidistant).unwrap();

    let mut found = 0;
    for e in 0..layout.edges.len() {
        let users: Vec<(usize, usize)> = layout
            .patches
            .iter()
            .enumerate()
            .flat_map(|(pi, p)| {
                p.sides.iter().enumerate().filter(move |&(_, &s)| s == e).map(move |(k, _)| (pi, k))
            })
            .collect();
        if users.len() != 2 {
            continue;
        }
        found += 1;
        let ((pa, ka), (pb, kb)) = (users[0], users[1]);
        let chain_a = border_chain(&ho.elements[pa], n, ka);
        let chain_b = border_chain(&ho.elements[pb], n, kb);
        let opposed = layout.patches[pa].forward[ka] != layout.patches[pb].forward[kb];
        let reversed: Vec<usize> = chain_b.iter().rev().copied().collect();
        if opposed {
            assert_eq!(chain_a, reversed, "edge {e}: opposing sides reverse");
        } else {
            assert_eq!(chain_a, chain_b, "edge {e}: aligned sides agree");
        }
    }
    assert_eq!(found, 1, "exactly the middle edge is interior");
}

#[test]
fn gauss_lobatto_spacing_shifts_edge_nodes() {
    let (mesh, layout, block) = solved_block("grid(2,2)");
    let proxy = GeometryProxy::build(&mesh);
    let ho = build_high_order(&block, &layout, &proxy, 5, Spacing::GaussLobatto).unwrap();
    let gl = gauss_lobatto_points(5);

    // Bottom side spans [0, 2]: arc parameters are the Gauss-Lobatto
    // points mapped from [-1, 1].
    let mut xs: Vec<f64> = ho
        .nodes
        .iter()
        .filter(|p| p.y == 0.0 && p.x > 0.0 && p.x < 2.0)
        .map(|p| p.x)
        .collect();
    xs.sort_by(f64::total_cmp);
    assert_eq!(xs.len(), 4);
    for (x, g) in xs.iter().zip(&gl[1..5]) {
        assert!((x - (g + 1.0)).abs() < 1e-12, "{x} vs {}", g + 1.0);
    }
}

#[test]
fn equidistant_gaps_measured_independently() {
    // A deliberately uneven polyline; samples must still cut equal arcs,
    // with the parameters recovered through projection rather than taken
    // from the sampler.
    let pts = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(0.3, 0.1, 0.0),
        Vec3::new(0.5, 0.35, 0.0),
        Vec3::new(0.6, 0.8, 0.0),
        Vec3::new(0.55, 1.3, 0.0),
    ];
    let geom = CurveGeom::from_points(pts, false);
    let n = 7;
    let fracs = lattice_params(n, Spacing::Equidistant);
    let params: Vec<f64> = fracs
        .iter()
        .map(|&f| geom.project(geom.point_at(geom.total() * f)).0)
        .collect();
    let step = geom.total() / n as f64;
    for w in params.windows(2) {
        let gap = w[1] - w[0];
        assert!(((gap - step) / step).abs() <= 1e-9, "gap {gap} vs {step}");
    }
}

#[test]
fn zero_length_edge_is_degenerate() {
    let (mesh, layout, mut block) = solved_block("grid(2,2)");
    let proxy = GeometryProxy::build(&mesh);
    let pin = block.vertices[block.edge_fids[0][0]];
    for &f in &block.edge_fids[0] {
        block.vertices[f] = pin;
    }
    let err = build_high_order(&block, &layout, &proxy, 2, Spacing::Equidistant).unwrap_err();
    assert!(matches!(err, HighOrderError::DegenerateEdge { edge: 0 }), "{err:?}");
}

#[test]
fn native_format_round_trips_bit_exactly() {
    let (proxy, layout, block) = smoothed("ellipse_fig2");
    let ho = build_high_order(&block, &layout, &proxy, 3, Spacing::GaussLobatto).unwrap();

    let text = write_high_order(&ho);
    let back = parse_high_order(&text).unwrap();
    assert_eq!(back, ho);
    for (a, b) in ho.nodes.iter().zip(&back.nodes) {
        assert_eq!(a.x.to_bits(), b.x.to_bits());
        assert_eq!(a.y.to_bits(), b.y.to_bits());
        assert_eq!(a.z.to_bits(), b.z.to_bits());
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mesh.qho");
    export_high_order(&ho, &path, HoFormat::Native).unwrap();
    assert_eq!(import_high_order(&path).unwrap(), ho);
}

#[test]
fn obj_export_is_linear_only() {
    let (mesh, layout, block) = solved_block("grid(2,2)");
    let proxy = GeometryProxy::build(&mesh);

    let linear = build_high_order(&block, &layout, &proxy, 1, Spacing::Equidistant).unwrap();
    assert_eq!(linear.nodes.len(), 4);
    assert_eq!(
        io::write_obj(&linear).unwrap(),
        "v 0 0 0\nv 2 0 0\nv 0 2 0\nv 2 2 0\nf 1 2 4 3\n"
    );

    let quadratic = build_high_order(&block, &layout, &proxy, 2, Spacing::Equidistant).unwrap();
    assert!(matches!(io::write_obj(&quadratic), Err(HighOrderError::Unsupported(_))));
}

#[test]
fn parser_rejects_malformed_input() {
    let bad_header = parse_high_order("quadcoarse-ho v2\n");
    assert!(matches!(bad_header, Err(HighOrderError::Parse { line: 1, .. })));

    let good = "quadcoarse-ho v1\nrepresentation lagrange\norder 1\nspacing equidistant\n\
                nodes 4\n0 0 0\n1 0 0\n0 1 0\n1 1 0\nelements 1\ne 0 1 2 3\n";
    assert!(parse_high_order(good).is_ok());

    let truncated = good.rsplit_once("e 0 1 2 3\n").unwrap().0;
    assert!(matches!(parse_high_order(truncated), Err(HighOrderError::Parse { .. })));

    let short_element = good.replace("e 0 1 2 3", "e 0 1 2");
    assert!(matches!(parse_high_order(&short_element), Err(HighOrderError::Parse { .. })));

    let oob = good.replace("e 0 1 2 3", "e 0 1 2 9");
    assert!(matches!(parse_high_order(&oob), Err(HighOrderError::Parse { .. })));

    let spacing = good.replace("spacing equidistant", "spacing chebyshev");
    assert!(matches!(parse_high_order(&spacing), Err(HighOrderError::Parse { .. })));

    let repr = good.replace("representation lagrange", "representation bspline");
    assert!(matches!(parse_high_order(&repr), Err(HighOrderError::Parse { line: 2, .. })));
}

#[test]
fn curved_models_build_conforming_high_order_meshes() {
    for (spec, n) in [("ellipse_fig2", 3), ("annulus(8,3)", 4)] {
        let (proxy, layout, block) = smoothed(spec);
        let ho = build_high_order(&block, &layout, &proxy, n, Spacing::Equidistant).unwrap();
        assert_eq!(
            ho.nodes.len(),
            layout.vertices.len()
                + layout.edges.len() * (n - 1)
                + layout.patches.len() * (n - 1) * (n - 1),
            "{spec}"
        );
        for e in &ho.elements {
            assert_eq!(e.len(), (n + 1) * (n + 1), "{spec}");
        }
        // Feature-edge nodes sit on their curve proxy.
        for (e, edge) in layout.edges.iter().enumerate() {
            if let Some(c) = edge.feature {
                let base = layout.vertices.len() + e * (n - 1);
                for id in base..base + (n - 1) {
                    let p = ho.nodes[id];
                    let (_, q) = proxy.curve(c).project(p);
                    assert!(p.dist(q) <= 1e-12, "{spec} edge {e} node off curve");
                }
            }
        }
        for p in &ho.nodes {
            assert!(p.x.is_finite() && p.y.is_finite() && p.z.is_finite());
        }
    }
}
