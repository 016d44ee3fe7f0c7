use std::f64::consts::FRAC_PI_4;
use std::time::Duration;

use num::{BigInt, BigRational, FromPrimitive, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::mesh::{classify_vertices, generate_test_mesh, MeshSpec, QuadMesh};
use crate::tmesh::{build_tmesh, intersection_records, propagate_traces, TMesh, Trace,
    TraceIntersections};

fn pipeline_inputs(spec: &str) -> (QuadMesh, Vec<Trace>, TMesh, TraceIntersections) {
    let mesh = generate_test_mesh(&MeshSpec::parse(spec).unwrap()).unwrap();
    let classes = classify_vertices(&mesh);
    let traces = propagate_traces(&mesh, &classes, FRAC_PI_4).unwrap();
    let tmesh = build_tmesh(&mesh, &traces).unwrap();
    let ints = intersection_records(&mesh, &tmesh, &traces, FRAC_PI_4);
    (mesh, traces, tmesh, ints)
}

fn build(spec: &str, cfg: &QuantConfig) -> (TMesh, IlpModel) {
    let (mesh, traces, tmesh, ints) = pipeline_inputs(spec);
    let model = build_constraints_with(&mesh, &tmesh, &traces, &ints, cfg);
    model.check_invariants(&tmesh).unwrap();
    (tmesh, model)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Bare model for solver tests, identity arc map.
fn manual(weights: &[(i64, i64)], initial: &[i64], rows: Vec<LinRow>) -> IlpModel {
    IlpModel {
        var_of_arc: (0..weights.len()).collect(),
        weights: weights.iter().map(|&(n, d)| rat(n, d)).collect(),
        initial: initial.to_vec(),
        rows,
    }
}

fn row(terms: &[(usize, i64)], sense: Sense, rhs: i64, tag: RowTag) -> LinRow {
    LinRow { terms: terms.to_vec(), sense, rhs, tag }
}

#[test]
fn grid_model_golden() {
    let (_, model) = build("grid(4,4)", &QuantConfig::default());
    assert_eq!(model.vars(), 4);
    assert_eq!(model.tag_counts(), [4, 2, 4, 0]);
    let expected = "\
quadcoarse-ilp v1
vars 4
v0 w 1/4 init 4 arcs 0
v1 w 1/4 init 4 arcs 1
v2 w 1/4 init 4 arcs 2
v3 w 1/4 init 4 arcs 3
rows 10
nonneg >= 0 +1*v0
nonneg >= 0 +1*v1
nonneg >= 0 +1*v2
nonneg >= 0 +1*v3
consistency = 0 +1*v0 -1*v3
consistency = 0 -1*v1 +1*v2
validity >= 1 +1*v0
validity >= 1 +1*v1
validity >= 1 +1*v2
validity >= 1 +1*v3
";
    assert_eq!(dump_model(&model), expected);
}

#[test]
fn grid_quantization_all_ones() {
    let (tmesh, model) = build("grid(4,4)", &QuantConfig::default());
    let oracle = brute_force_solve(&model, None).unwrap();
    assert_eq!(oracle.status, QuantStatus::Optimal);
    assert_eq!(oracle.q, vec![1, 1, 1, 1]);
    assert_eq!(oracle.objective_value, BigRational::one());

    let quant = solve(&model, &SolveBudget::default());
    assert_eq!(quant.status, QuantStatus::Optimal);
    assert_eq!(quant.q, oracle.q);
    assert_eq!(quant.objective_value, oracle.objective_value);

    assert_eq!(integer_area(&tmesh, &quant), 1);
    let initial = Quantization {
        q: vec![4, 4, 4, 4],
        objective_value: rat(4, 1),
        status: QuantStatus::Optimal,
    };
    assert_eq!(integer_area(&tmesh, &initial), 16);
    let squashed = Quantization {
        q: vec![0, 4, 4, 0],
        objective_value: BigRational::zero(),
        status: QuantStatus::Optimal,
    };
    assert_eq!(integer_area(&tmesh, &squashed), 0);
}

#[test]
fn grid_unified_shares_variables() {
    let cfg = QuantConfig { collapse_35: true, unify_opposite_singles: true };
    let (_, model) = build("grid(4,4)", &cfg);
    assert_eq!(model.vars(), 2);
    assert_eq!(model.var_of_arc, vec![0, 1, 1, 0]);
    assert_eq!(model.weights, vec![rat(1, 2), rat(1, 2)]);
    // The equalities became shared variables, so no consistency rows left.
    assert_eq!(model.tag_counts(), [2, 0, 2, 0]);

    let quant = solve(&model, &SolveBudget::default());
    assert_eq!(quant.q, vec![1, 1, 1, 1]);
    assert_eq!(quant.objective_value, BigRational::one());
}

#[test]
fn annulus_loops_stay_open() {
    let (tmesh, model) = build("annulus(8,3)", &QuantConfig::default());
    assert_eq!(model.vars(), 3);
    assert_eq!(model.initial, vec![8, 3, 8]);

    let oracle = brute_force_solve(&model, None).unwrap();
    assert_eq!(oracle.q, vec![1, 1, 1]);
    assert_eq!(oracle.objective_value, rat(7, 12));

    let quant = solve(&model, &SolveBudget::default());
    assert_eq!(quant.q, oracle.q);
    assert_eq!(quant.objective_value, oracle.objective_value);
    assert_eq!(integer_area(&tmesh, &quant), 1);
}

#[test]
fn equality_pair_solves_to_ones() {
    let model = manual(
        &[(1, 1), (1, 1)],
        &[3, 3],
        vec![
            row(&[(0, 1)], Sense::Ge, 0, RowTag::Nonneg),
            row(&[(1, 1)], Sense::Ge, 0, RowTag::Nonneg),
            row(&[(0, 1), (1, -1)], Sense::Eq, 0, RowTag::Consistency),
            row(&[(0, 1)], Sense::Ge, 1, RowTag::Validity),
        ],
    );
    for quant in [brute_force_solve(&model, None).unwrap(), solve(&model, &SolveBudget::default())]
    {
        assert_eq!(quant.status, QuantStatus::Optimal);
        assert_eq!(quant.q, vec![1, 1]);
        assert_eq!(quant.objective_value, rat(2, 1));
    }
}

#[test]
fn contradiction_is_infeasible() {
    let model = manual(
        &[(1, 1)],
        &[2],
        vec![
            row(&[(0, 1)], Sense::Ge, 1, RowTag::Validity),
            row(&[(0, 1)], Sense::Eq, 0, RowTag::Consistency),
        ],
    );
    assert_eq!(brute_force_solve(&model, None).unwrap().status, QuantStatus::Infeasible);
    assert_eq!(solve(&model, &SolveBudget::default()).status, QuantStatus::Infeasible);
}

#[test]
fn cheapest_activation_wins() {
    let model = manual(
        &[(1, 2), (1, 5)],
        &[2, 5],
        vec![row(&[(0, 1), (1, 1)], Sense::Ge, 1, RowTag::Validity)],
    );
    for quant in [brute_force_solve(&model, None).unwrap(), solve(&model, &SolveBudget::default())]
    {
        assert_eq!(quant.q, vec![0, 1]);
        assert_eq!(quant.objective_value, rat(1, 5));
    }
}

#[test]
fn unconstrained_model_is_all_zero() {
    let model = manual(&[(1, 1), (1, 1), (1, 1)], &[1, 1, 1], Vec::new());
    for quant in [brute_force_solve(&model, None).unwrap(), solve(&model, &SolveBudget::default())]
    {
        assert_eq!(quant.q, vec![0, 0, 0]);
        assert!(quant.objective_value.is_zero());
    }
}

#[test]
fn brute_force_rejects_huge_boxes() {
    let model = manual(&[(1, 1); 10], &[100; 10], Vec::new());
    assert!(matches!(
        brute_force_solve(&model, None),
        Err(crate::error::IlpError::TooLarge { .. })
    ));
}

#[test]
fn collapse_flag_waives_pair_rows() {
    let (mesh, traces, tmesh, ints) = pipeline_inputs("ellipse_fig2");
    let on = build_constraints(&mesh, &tmesh, &traces, &ints, true);
    let off = build_constraints(&mesh, &tmesh, &traces, &ints, false);
    on.check_invariants(&tmesh).unwrap();
    off.check_invariants(&tmesh).unwrap();

    // The mutual 1/1 contacts of the dislocation pair are single-arc picks.
    let pair_arcs: Vec<Vec<(usize, i64)>> = ints
        .records
        .iter()
        .filter(|r| r.l_ij == 1 && r.l_ji == 1 && r.in_pi4_cone_of_i)
        .map(|r| vec![(r.s_ij[0], 1)])
        .collect();
    assert!(!pair_arcs.is_empty());
    let count = |model: &IlpModel| {
        model
            .rows
            .iter()
            .filter(|row| row.tag == RowTag::Validity && pair_arcs.contains(&row.terms))
            .count()
    };
    assert_eq!(count(&on), 0);
    assert!(count(&off) >= 2);
    let [_, c_on, v_on, g_on] = on.tag_counts();
    let [_, c_off, v_off, g_off] = off.tag_counts();
    assert_eq!(c_on, c_off);
    assert_eq!(g_on, g_off);
    assert!(v_on < v_off);
    assert!(c_on > 0 && v_on > 0);
}

#[test]
fn initial_lengths_always_feasible() {
    let specs = [
        "grid(4,4)",
        "grid(7,3)",
        "annulus(8,3)",
        "disk_with_pair",
        "ellipse_fig2",
        "annulus_with_pairs(8,4,1)",
    ];
    for spec in specs {
        for unify in [false, true] {
            for collapse in [false, true] {
                let cfg = QuantConfig { collapse_35: collapse, unify_opposite_singles: unify };
                let (tmesh, model) = build(spec, &cfg);
                model.check_invariants(&tmesh).unwrap();
            }
        }
    }
}

#[test]
fn solver_matches_oracle_on_small_models() {
    let specs = ["grid(4,4)", "grid(7,3)", "annulus(8,3)"];
    let mut checked = 0;
    for spec in specs {
        for unify in [false, true] {
            let cfg = QuantConfig { collapse_35: true, unify_opposite_singles: unify };
            let (_, model) = build(spec, &cfg);
            let states: f64 = model.initial.iter().map(|&b| b as f64 + 1.0).product();
            if model.vars() > 12 || states > 1e5 {
                continue;
            }
            let oracle = brute_force_solve(&model, None).unwrap();
            let quant = solve(&model, &SolveBudget::default());
            assert_eq!(quant.status, QuantStatus::Optimal, "{spec} unify={unify}");
            assert_eq!(
                quant.objective_value, oracle.objective_value,
                "{spec} unify={unify}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 4);
}

#[test]
fn oracle_box_extension_preserves_objective() {
    // Random instances shaped like real models: weights 1/l, balance
    // equalities anchored at l, unit-coefficient separation rows with
    // right-hand side 0 or 1. Within that family the initial-length box
    // cannot cut off the optimum.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for round in 0..40 {
        let n0 = rng.gen_range(1..=3);
        let mut l: Vec<i64> = (0..n0).map(|_| rng.gen_range(1..=3)).collect();
        let mut rows = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            let subset: Vec<usize> = (0..l.len()).filter(|_| rng.gen_bool(0.6)).collect();
            if subset.is_empty() {
                continue;
            }
            let a = l.len();
            l.push(subset.iter().map(|&v| l[v]).sum());
            let mut terms = vec![(a, 1i64)];
            terms.extend(subset.iter().map(|&v| (v, -1)));
            terms.sort();
            rows.push(row(&terms, Sense::Eq, 0, RowTag::Consistency));
        }
        for _ in 0..rng.gen_range(0..=3) {
            let subset: Vec<(usize, i64)> =
                (0..l.len()).filter(|_| rng.gen_bool(0.5)).map(|v| (v, 1)).collect();
            if subset.is_empty() {
                continue;
            }
            rows.push(row(&subset, Sense::Ge, rng.gen_range(0..=1), RowTag::Validity));
        }
        let weights: Vec<(i64, i64)> = l.iter().map(|&v| (1, v)).collect();
        let model = manual(&weights, &l, rows);
        let wide: Vec<i64> = l.iter().map(|&v| v + 2).collect();
        let states: f64 = wide.iter().map(|&b| b as f64 + 1.0).product();
        if states > 1e6 {
            continue;
        }
        let tight = brute_force_solve(&model, None).unwrap();
        let wider = brute_force_solve(&model, Some(&wide)).unwrap();
        assert_eq!(tight.status, QuantStatus::Optimal, "round {round}");
        assert_eq!(tight.objective_value, wider.objective_value, "round {round}");
        let solved = solve(&model, &SolveBudget::default());
        assert_eq!(solved.objective_value, tight.objective_value, "round {round}");
    }
}

#[test]
fn zero_budget_returns_seed_point() {
    let (_, model) = build("grid(4,4)", &QuantConfig::default());
    let budget = SolveBudget { max_nodes: 0, max_time: Duration::from_secs(60) };
    let quant = solve(&model, &budget);
    assert_eq!(quant.status, QuantStatus::FeasibleBudgetHit);
    assert_eq!(quant.q, vec![4, 4, 4, 4]);
    assert_eq!(quant.objective_value, BigRational::from_i64(4).unwrap());
}

#[test]
fn solver_is_deterministic() {
    let (_, model) = build("ellipse_fig2", &QuantConfig::default());
    let a = solve(&model, &SolveBudget::default());
    let b = solve(&model, &SolveBudget::default());
    assert_eq!(a.status, QuantStatus::Optimal);
    assert_eq!(a.q, b.q);
    assert_eq!(a.objective_value, b.objective_value);
}

#[test]
fn quantization_dump_format() {
    let quant = Quantization {
        q: vec![1, 0, 2],
        objective_value: rat(7, 12),
        status: QuantStatus::Optimal,
    };
    let expected = "\
quadcoarse-quant v1
status optimal
objective 7/12
arcs 3
a0 1
a1 0
a2 2
";
    assert_eq!(dump_quantization(&quant), expected);
}
