use std::collections::BTreeMap;

use cardionet_core::analysis::{
    beta_from_cell, compare_proportions, influential_findings, prevalence_table, whatif_improvements,
    BetaPosterior,
};
use cardionet_core::fixture::cvd_fixture;
use cardionet_core::inference::query_conditional;
use cardionet_core::learning::{fit_parameters, forward_sample, tabulate_counts};
use cardionet_core::synth::{random_network, random_query, RandomNetworkConfig};
use cardionet_core::{BayesianNetwork, Cpt, Dag, Evidence, VariableSpec};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn table7_base() -> Evidence {
    [
        ("v1", "male"),
        ("v2", "(44-54]"),
        ("v3", "3"),
        ("v4", "3"),
        ("v5", "obese"),
        ("v6", "1"),
        ("v7", "<6h"),
        ("v8", "non-smoker"),
        ("v9", "yes"),
        ("v10", "no"),
    ]
    .into_iter()
    .fold(Evidence::new(), |e, (v, s)| e.with(v, s))
}

fn table7_improvements() -> Vec<(String, String)> {
    [("v5", "normal"), ("v6", "2"), ("v7", "6h-9h"), ("v9", "no")]
        .iter()
        .map(|(v, s)| (v.to_string(), s.to_string()))
        .collect()
}

#[test]
fn table7_shape_on_fixture() {
    let net = cvd_fixture();
    let target = Evidence::new().with("v11", "yes");
    let t = whatif_improvements(&net, &table7_base(), &table7_improvements(), &target, true).unwrap();
    assert_eq!(t.rows.len(), 4);
    let all = table7_improvements()
        .iter()
        .fold(table7_base(), |e, (v, s)| e.with(v, s));
    let combined = t.combined.as_ref().unwrap();
    assert_eq!(combined.probability, query_conditional(&net, &all, &target).unwrap().probability);
    for row in &t.rows {
        let ev = table7_base().with(&row.variable, &row.improved_state);
        let direct = query_conditional(&net, &ev, &target).unwrap().probability;
        assert!((row.probability - direct).abs() <= 1e-12);
    }
}

#[test]
fn prevalence_by_socioeconomic_status() {
    let net = cvd_fixture();
    let outcomes: Vec<(String, Vec<String>)> = ["v11", "v12", "v13"]
        .iter()
        .map(|v| (v.to_string(), vec!["yes".to_string()]))
        .collect();
    let t = prevalence_table(&net, "v4", &outcomes).unwrap();
    assert_eq!(t.cells.len(), 3);
    for (g, row) in t.group_states.iter().zip(&t.cells) {
        for ((v, s), cell) in outcomes.iter().zip(row) {
            let direct = query_conditional(&net, &Evidence::new().with("v4", g), &Evidence::new().with_any(v, s.clone()))
                .unwrap()
                .probability;
            assert!((cell - direct).abs() <= 1e-12);
        }
    }
}

#[test]
fn influence_on_fixture_reproduces_queries() {
    let net = cvd_fixture();
    let target = Evidence::new().with("v7", "<6h");
    let ev = Evidence::new().with("v2", "(64-74]").with("v1", "male").with("v9", "yes");
    let r = influential_findings(&net, &ev, &target).unwrap();
    assert_eq!(r.base_probability, query_conditional(&net, &ev, &target).unwrap().probability);
    for row in &r.rows {
        let direct = query_conditional(&net, &ev.without(&row.variable), &target).unwrap().probability;
        assert!((row.probability.unwrap() - direct).abs() <= 1e-12);
    }
    assert_eq!(r.most_influential.as_deref(), Some("v2"));
}

/// A -> B -> C chain plus an isolated D.
fn chain_with_bystander() -> BayesianNetwork {
    let bin = |id: &str| VariableSpec::new(id, id, ["t", "f"]).unwrap();
    let dag = Dag::new(["A", "B", "C", "D"], [("B", vec!["A"]), ("C", vec!["B"])]).unwrap();
    BayesianNetwork::new(
        vec![bin("A"), bin("B"), bin("C"), bin("D")],
        &dag,
        vec![
            Cpt::new("A", vec![], vec![vec![0.3, 0.7]]).unwrap(),
            Cpt::new("B", vec!["A".into()], vec![vec![0.8, 0.2], vec![0.25, 0.75]]).unwrap(),
            Cpt::new("C", vec!["B".into()], vec![vec![0.9, 0.1], vec![0.35, 0.65]]).unwrap(),
            Cpt::new("D", vec![], vec![vec![0.5, 0.5]]).unwrap(),
        ],
        BTreeMap::new(),
    )
    .unwrap()
}

#[test]
fn separated_findings_have_no_influence() {
    let net = chain_with_bystander();
    let target = Evidence::new().with("C", "t");
    // A is blocked from C by the observed B
    let r = influential_findings(&net, &Evidence::new().with("A", "t").with("B", "f"), &target).unwrap();
    let a = r.rows.iter().find(|row| row.variable == "A").unwrap();
    assert!(a.delta.unwrap().abs() <= 1e-10);
    assert_eq!(r.most_influential.as_deref(), Some("B"));
    // appending separated evidence keeps the argmax
    let more = Evidence::new().with("A", "t").with("B", "f").with("D", "t");
    let r2 = influential_findings(&net, &more, &target).unwrap();
    assert_eq!(r2.most_influential, r.most_influential);
}

#[test]
fn whatif_on_monotone_chain() {
    let net = chain_with_bystander();
    let base = Evidence::new().with("A", "f").with("B", "f");
    let target = Evidence::new().with("C", "t");
    let imp = vec![("A".to_string(), "t".to_string()), ("B".to_string(), "t".to_string())];
    let t = whatif_improvements(&net, &base, &imp, &target, true).unwrap();
    assert!((t.rows[0].probability - 0.35).abs() < 1e-12);
    assert!((t.rows[1].probability - 0.9).abs() < 1e-12);
    assert!((t.combined.unwrap().probability - 0.9).abs() < 1e-12);
}

#[test]
fn beta_from_learned_cell() {
    let truth = cvd_fixture();
    let data = forward_sample(&truth, 1_000, 6);
    let stats = tabulate_counts(&data, truth.dag()).unwrap();
    let post = fit_parameters(&stats, 1.0).unwrap();
    let parents: BTreeMap<String, String> = [("v2".to_string(), "(64-74]".to_string())].into();
    let beta = beta_from_cell(&post, "v7", &parents, "<6h").unwrap();
    let row = stats.table("v7").unwrap().row(5);
    assert_eq!(beta.a, row[0] as f64 + 1.0);
    assert_eq!(beta.a + beta.b, row.iter().sum::<u64>() as f64 + 3.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn analysis_rows_decompose_into_queries(seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, &RandomNetworkConfig { min_nodes: 3, ..RandomNetworkConfig::default() });
        let (mut ev, target) = random_query(&mut rng, &net, 4, 0.0);
        if ev.is_empty() {
            let v = net.variables().iter().find(|v| !target.contains(&v.id)).unwrap();
            ev.observe(v.id.clone(), v.states[0].clone());
        }
        let Ok(base) = query_conditional(&net, &ev, &target) else {
            return Ok(());
        };
        let r = influential_findings(&net, &ev, &target).unwrap();
        prop_assert_eq!(r.base_probability, base.probability);
        for row in &r.rows {
            let direct = query_conditional(&net, &ev.without(&row.variable), &target).unwrap().probability;
            prop_assert!((row.probability.unwrap() - direct).abs() <= 1e-12);
        }
        let improvements: Vec<(String, String)> = ev
            .iter()
            .filter_map(|(v, s)| {
                let spec = net.variable(v).unwrap();
                let other: Vec<&String> = spec.states.iter().filter(|x| **x != s[0]).collect();
                other.choose(&mut rng).map(|x| (v.to_string(), x.to_string()))
            })
            .collect();
        if let Ok(t) = whatif_improvements(&net, &ev, &improvements, &target, true) {
            for row in &t.rows {
                let direct = query_conditional(&net, &ev.clone().with(&row.variable, &row.improved_state), &target)
                    .unwrap()
                    .probability;
                prop_assert!((row.probability - direct).abs() <= 1e-12);
            }
        }
        let group = net.variables().iter().find(|v| !target.contains(&v.id)).unwrap();
        let outcomes: Vec<(String, Vec<String>)> = target.iter().map(|(v, s)| (v.to_string(), s.to_vec())).collect();
        if let Ok(t) = prevalence_table(&net, &group.id, &outcomes) {
            for (g, row) in t.group_states.iter().zip(&t.cells) {
                let direct = query_conditional(&net, &Evidence::new().with(&group.id, g), &target).unwrap().probability;
                prop_assert!((row[0] - direct).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn self_comparison_is_a_coin_flip(a in 0.5f64..50.0, b in 0.5f64..50.0, seed in 0u64..1000) {
        let p = BetaPosterior::new(a, b).unwrap();
        let c = compare_proportions(p, p, 20_000, seed).unwrap();
        prop_assert!((c.probability - 0.5).abs() <= 3.0 * 0.5 / (20_000f64).sqrt() + 1e-12);
    }

    #[test]
    fn swapped_comparisons_sum_to_one(a in 0.5f64..50.0, b in 0.5f64..50.0, c in 0.5f64..50.0, d in 0.5f64..50.0, seed in 0u64..1000) {
        prop_assume!((a, b) != (c, d));
        let p = BetaPosterior::new(a, b).unwrap();
        let q = BetaPosterior::new(c, d).unwrap();
        let x = compare_proportions(p, q, 5_000, seed).unwrap();
        let y = compare_proportions(q, p, 5_000, seed).unwrap();
        prop_assert_eq!(x.greater + y.greater + x.ties, 5_000);
        prop_assert!((x.probability + y.probability - 1.0).abs() <= 1e-15);
    }
}
