use std::collections::{BTreeMap, BTreeSet};

use cardionet_core::fixture::cvd_fixture;
use cardionet_core::learning::forward_sample;
use cardionet_core::structure::{
    apply_edits, family_score, greedy_thick_thinning, total_score, EditScript, StructureConstraints,
};
use cardionet_core::{BayesianNetwork, Cpt, Dag, Dataset, VariableSpec};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn binary(id: &str) -> VariableSpec {
    VariableSpec::new(id, id, ["t", "f"]).unwrap()
}

fn strong_chain() -> BayesianNetwork {
    let dag = Dag::new(["A", "B", "C"], [("B", vec!["A"]), ("C", vec!["B"])]).unwrap();
    let copy = vec![vec![0.9, 0.1], vec![0.1, 0.9]];
    BayesianNetwork::new(
        vec![binary("A"), binary("B"), binary("C")],
        &dag,
        vec![
            Cpt::new("A", vec![], vec![vec![0.5, 0.5]]).unwrap(),
            Cpt::new("B", vec!["A".into()], copy.clone()).unwrap(),
            Cpt::new("C", vec!["B".into()], copy).unwrap(),
        ],
        BTreeMap::new(),
    )
    .unwrap()
}

/// Every DAG over three nodes: each pair is absent, forward or backward,
/// keeping the 25 acyclic combinations.
fn all_three_node_dags(nodes: [&str; 3]) -> Vec<Dag> {
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut out = Vec::new();
    for code in 0..27 {
        let mut parents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mut c = code;
        for &(a, b) in &pairs {
            match c % 3 {
                1 => parents.entry(nodes[b]).or_default().push(nodes[a]),
                2 => parents.entry(nodes[a]).or_default().push(nodes[b]),
                _ => {}
            }
            c /= 3;
        }
        if let Ok(d) = Dag::new(nodes, parents) {
            out.push(d);
        }
    }
    out
}

fn skeleton(dag: &Dag) -> BTreeSet<(String, String)> {
    dag.arcs()
        .into_iter()
        .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
        .collect()
}

#[test]
fn there_are_25_dags_on_three_nodes() {
    assert_eq!(all_three_node_dags(["A", "B", "C"]).len(), 25);
}

#[test]
fn strong_chain_is_recovered_and_score_maximal() {
    let data = forward_sample(&strong_chain(), 50_000, 2024);
    let out = greedy_thick_thinning(&data, &StructureConstraints::new(), 1.0).unwrap();
    let expected: BTreeSet<_> = [("A".to_string(), "B".to_string()), ("B".into(), "C".into())].into();
    assert_eq!(skeleton(&out.dag), expected);
    let best = all_three_node_dags(["A", "B", "C"])
        .iter()
        .map(|d| total_score(&data, d, 1.0).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(out.score >= best - 1e-9, "greedy {} vs best {}", out.score, best);
    assert!(out.local_optimum);
}

#[test]
fn independent_uniform_pair_scores_below_empty() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut data = Dataset::new(vec![binary("A"), binary("B")]);
    let mut rows: Vec<[u16; 2]> = (0..10_000).map(|i| [(i % 2) as u16, ((i / 2) % 2) as u16]).collect();
    rows.shuffle(&mut rng);
    for r in &rows {
        data.push(r);
    }
    let empty = Dag::empty(["A", "B"]).unwrap();
    let ab = Dag::new(["A", "B"], [("B", vec!["A"])]).unwrap();
    let ba = Dag::new(["A", "B"], [("A", vec!["B"])]).unwrap();
    let base = total_score(&data, &empty, 1.0).unwrap();
    assert!(total_score(&data, &ab, 1.0).unwrap() < base);
    assert!(total_score(&data, &ba, 1.0).unwrap() < base);
    let out = greedy_thick_thinning(&data, &StructureConstraints::new(), 1.0).unwrap();
    assert_eq!(out.dag.arc_count(), 0);
}

#[test]
fn required_arc_is_kept_on_fixture_data() {
    let data = forward_sample(&cvd_fixture(), 2_000, 8);
    let c = StructureConstraints::new().require("v1", "v8");
    let out = greedy_thick_thinning(&data, &c, 1.0).unwrap();
    assert!(out.dag.has_arc("v1", "v8"));
    out.dag.topological_indices().unwrap();
}

#[test]
fn edits_turn_a_learned_skeleton_into_the_published_graph() {
    let fixture = cvd_fixture();
    let data = forward_sample(&fixture, 5_000, 21);
    let learned = greedy_thick_thinning(&data, &StructureConstraints::new(), 1.0).unwrap().dag;
    let script = EditScript::between(&learned, fixture.dag()).unwrap();
    let text = script.to_text();
    let reparsed: EditScript = text.parse().unwrap();
    assert_eq!(&apply_edits(&learned, &reparsed).unwrap(), fixture.dag());
}

#[test]
fn hand_written_script_builds_the_published_graph() {
    let fixture = cvd_fixture();
    let empty = Dag::empty(fixture.dag().nodes().iter().cloned()).unwrap();
    let mut text = String::from("# published parent sets\n");
    for (child, parents) in cardionet_core::fixture::parent_sets() {
        for p in parents {
            text.push_str(&format!("add {p} {child}\n"));
        }
    }
    let script: EditScript = text.parse().unwrap();
    assert_eq!(&apply_edits(&empty, &script).unwrap(), fixture.dag());
}

fn random_binary_data(seed: u64, n: usize, width: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<VariableSpec> = (0..width).map(|i| binary(&format!("X{i}"))).collect();
    let mut d = Dataset::new(vars);
    for _ in 0..n {
        let first = rand::Rng::random_range(&mut rng, 0..2u16);
        let rec: Vec<u16> = (0..width)
            .map(|i| {
                if i > 0 && rand::Rng::random_bool(&mut rng, 0.7) {
                    first
                } else {
                    rand::Rng::random_range(&mut rng, 0..2u16)
                }
            })
            .collect();
        d.push(&rec);
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn score_ignores_record_order(seed in 0u64..1000) {
        let d = random_binary_data(seed, 300, 3);
        let mut idx: Vec<usize> = (0..d.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed + 1));
        let shuffled = d.select(&idx);
        let a = family_score(&d, "X2", &["X0", "X1"], 1.0).unwrap();
        let b = family_score(&shuffled, "X2", &["X0", "X1"], 1.0).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn adding_an_arc_changes_only_the_child_family(seed in 0u64..1000) {
        let d = random_binary_data(seed, 200, 4);
        let before = Dag::new(["X0", "X1", "X2", "X3"], [("X1", vec!["X0"])]).unwrap();
        let after = Dag::new(["X0", "X1", "X2", "X3"], [("X1", vec!["X0"]), ("X3", vec!["X1"])]).unwrap();
        let diff = total_score(&d, &after, 1.0).unwrap() - total_score(&d, &before, 1.0).unwrap();
        let family = family_score(&d, "X3", &["X1"], 1.0).unwrap() - family_score(&d, "X3", &[], 1.0).unwrap();
        prop_assert!((diff - family).abs() < 1e-9);
    }

    #[test]
    fn search_output_is_acyclic_constrained_and_deterministic(seed in 0u64..1000, cap in 1usize..3) {
        let d = random_binary_data(seed, 400, 5);
        let c = StructureConstraints::new()
            .require("X4", "X0")
            .forbid("X1", "X2")
            .with_max_parents(Some(cap));
        let out = greedy_thick_thinning(&d, &c, 1.0).unwrap();
        out.dag.topological_indices().unwrap();
        prop_assert!(out.dag.has_arc("X4", "X0"));
        prop_assert!(!out.dag.has_arc("X1", "X2"));
        prop_assert!((0..5).all(|i| out.dag.parent_indices(i).len() <= cap));
        prop_assert!(out.local_optimum);
        let again = greedy_thick_thinning(&d, &c, 1.0).unwrap();
        prop_assert_eq!(again.dag, out.dag);
    }

    #[test]
    fn three_node_search_is_near_optimal_or_locally_optimal(seed in 0u64..1000) {
        let d = random_binary_data(seed, 500, 3);
        let out = greedy_thick_thinning(&d, &StructureConstraints::new(), 1.0).unwrap();
        let best = all_three_node_dags(["X0", "X1", "X2"])
            .iter()
            .map(|g| total_score(&d, g, 1.0).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(out.score >= best - 1e-9 || out.local_optimum);
    }
}
