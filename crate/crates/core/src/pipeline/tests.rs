use super::*;
use crate::extraction::LayoutClass;

fn cfg_for(spec: &str) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(MeshSource::Generate(MeshSpec::parse(spec).unwrap()));
    cfg.order = 2;
    cfg
}

#[test]
fn regular_grid_coarsens_to_one_patch() {
    let out = run_pipeline(&cfg_for("grid(4,4)")).unwrap();
    assert_eq!(out.stats.p_final, 1);
    assert_eq!(out.stats.irr, 0);
    assert_eq!(out.stats.faces, 16);
    assert_eq!(out.stats.p_init, 1);
    assert_eq!(out.stats.vars, 4);
    assert_eq!(out.quant.status, QuantStatus::Optimal);
    assert!(out.smooth_converged);
}

#[test]
fn ellipse_keeps_feature_chain_and_collapses_pair() {
    let out = run_pipeline(&cfg_for("ellipse_fig2")).unwrap();
    let layout = &out.layout;

    let corners: Vec<usize> = (0..layout.vertices.len())
        .filter(|&v| layout.vertices[v].class == LayoutClass::Corner)
        .collect();
    assert_eq!(corners.len(), 2, "both tips survive");

    // The horizontal line connecting the tip corners is kept: interior
    // layout edges embedded exactly on y = 0 chain the corners together.
    let mut uf = UnionFind::new(layout.vertices.len());
    let mut midline_edges = 0;
    for e in &layout.edges {
        let on_axis = e.path.iter().all(|&v| out.mesh.position(v).y.abs() < 1e-9);
        if e.feature.is_none() && on_axis {
            uf.union(e.v[0], e.v[1]);
            midline_edges += 1;
        }
    }
    assert!(midline_edges >= 2);
    assert_eq!(uf.find(corners[0]), uf.find(corners[1]), "horizontal line is kept");

    // The interior dislocation pair merges into one regular layout vertex.
    let classes = classify_vertices(&out.mesh);
    let merged = layout
        .vertices
        .iter()
        .position(|v| {
            let vals: Vec<usize> = v
                .group
                .iter()
                .filter(|&&x| !out.mesh.is_on_feature(x) && classes[x].is_irregular())
                .map(|&x| classes[x].valence)
                .collect();
            vals.contains(&3) && vals.contains(&5)
        })
        .expect("3-5 pair collapses");
    assert_eq!(layout.valence(merged), 4);
}

#[test]
fn zero_alpha_permits_no_coarsening() {
    for spec in ["ellipse_fig2", "disk_with_pair"] {
        let relaxed = run_pipeline(&cfg_for(spec)).unwrap();
        let mut zero = cfg_for(spec);
        zero.alpha = 0.0;
        let strict = run_pipeline(&zero).unwrap();

        assert_eq!(strict.stats.p_final, strict.stats.p_init, "{spec}");
        assert!(relaxed.stats.p_final < strict.stats.p_final, "{spec}");

        // With a degenerate cone every crossing gets a separation row.
        let geom = |m: &IlpModel| m.tag_counts()[crate::ilp::RowTag::Geometric as usize];
        assert!(geom(&strict.model) > geom(&relaxed.model), "{spec}");
    }
}

#[test]
fn input_layout_counts_are_stable() {
    let count = |spec: &str| {
        compute_input_layout_count(
            &generate_test_mesh(&MeshSpec::parse(spec).unwrap()).unwrap(),
        )
    };
    assert_eq!(count("grid(4,4)"), 1);
    assert_eq!(count("annulus(8,3)"), 1);
    assert_eq!(count("disk_with_pair"), 9);
    assert_eq!(count("ellipse_fig2"), 11);

    // The exhaustive layout refines the early-stopping T-mesh.
    let out = run_pipeline(&cfg_for("ellipse_fig2")).unwrap();
    assert!(out.stats.p_init >= out.tmesh.patches.len());
}

#[test]
fn stats_row_matches_header_and_invariants_hold() {
    let out = run_pipeline(&cfg_for("disk_with_pair")).unwrap();
    let header_fields = RunStats::csv_header().split(',').count();
    let row = out.stats.csv_row();
    assert_eq!(row.split(',').count(), header_fields);
    assert!(row.starts_with("disk_with_pair(8,8,1),69,9,6,"));

    assert!(out.stats.p_final >= 1);
    let f = out.stats.fractions;
    for part in [f.load, f.ilp, f.smooth_ho] {
        assert!((0.0..=1.0).contains(&part));
    }
    assert!(f.load + f.ilp + f.smooth_ho <= 1.0);

    let summary = out.stats.summary();
    assert!(summary.contains("9 patches -> coarse layout 4 patches"));
    assert!(summary.contains("69 quads"));
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let mut cfg = cfg_for("ellipse_fig2");
        cfg.out_dir = Some(dir.path().to_path_buf());
        cfg.dump_all = true;
        run_pipeline(&cfg).unwrap();
    }

    let names = |d: &std::path::Path| -> Vec<String> {
        let mut v: Vec<String> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        v.sort();
        v
    };
    let listing = names(dirs[0].path());
    assert_eq!(listing, names(dirs[1].path()));
    for expect in [
        "fine.obj",
        "fine.qm",
        "high_order.qho",
        "input.qm",
        "tmesh.txt",
        "ilp_model.txt",
        "quantization.txt",
        "layout.txt",
        "quality.csv",
    ] {
        assert!(listing.iter().any(|n| n == expect), "missing {expect}");
    }
    for name in &listing {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert!(!a.is_empty(), "{name} is empty");
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn linear_order_also_writes_an_obj() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = cfg_for("grid(4,4)");
    cfg.order = 1;
    cfg.out_dir = Some(dir.path().to_path_buf());
    run_pipeline(&cfg).unwrap();
    assert!(dir.path().join("high_order.obj").exists());
    assert!(!dir.path().join("tmesh.txt").exists(), "intermediates need dump_all");
}

#[test]
fn config_validation_rejects_bad_parameters() {
    let mut cfg = cfg_for("grid(4,4)");
    cfg.alpha = -0.1;
    assert!(matches!(run_pipeline(&cfg), Err(PipelineError::Config(_))));
    cfg.alpha = 0.8;
    assert!(matches!(run_pipeline(&cfg), Err(PipelineError::Config(_))));
    cfg.alpha = FRAC_PI_4;
    cfg.order = 0;
    assert!(matches!(run_pipeline(&cfg), Err(PipelineError::Config(_))));

    let bad = PipelineConfig::new(MeshSource::Generate(MeshSpec::parse("grid(4,4)").unwrap()));
    assert!(bad.validate().is_ok());
}

#[test]
fn file_source_reproduces_generated_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disk.qm");
    let mesh = generate_test_mesh(&MeshSpec::parse("disk_with_pair").unwrap()).unwrap();
    save_mesh(&mesh, &path, MeshFormat::Native).unwrap();

    let generated = run_pipeline(&cfg_for("disk_with_pair")).unwrap();
    let mut cfg = PipelineConfig::new(MeshSource::File(path));
    cfg.order = 2;
    let loaded = run_pipeline(&cfg).unwrap();

    assert_eq!(loaded.stats.model, "disk");
    assert_eq!(loaded.stats.faces, generated.stats.faces);
    assert_eq!(loaded.stats.p_init, generated.stats.p_init);
    assert_eq!(loaded.stats.p_final, generated.stats.p_final);
    assert_eq!(loaded.stats.vars, generated.stats.vars);
    assert_eq!(loaded.high_order.nodes.len(), generated.high_order.nodes.len());
    assert_eq!(loaded.quant.q, generated.quant.q);
}

#[test]
fn missing_input_file_reports_mesh_phase() {
    let cfg = PipelineConfig::new(MeshSource::File("/nonexistent/mesh.qm".into()));
    let Err(err) = run_pipeline(&cfg) else { panic!("missing file must fail") };
    assert!(matches!(err, PipelineError::Mesh(_)), "{err:?}");
    assert!(err.to_string().starts_with("mesh:"), "{err}");
}
