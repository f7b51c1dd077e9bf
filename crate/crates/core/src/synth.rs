//! Seeded random networks and queries for property tests and benchmarks.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::model::{BayesianNetwork, Cpt, Dag, Evidence, VariableSpec};

#[derive(Debug, Clone, Copy)]
pub struct RandomNetworkConfig {
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// At least 2.
    pub max_states: usize,
    pub max_parents: usize,
    /// Chance that a CPT row is made sparse (some exact zeros).
    pub sparse_row_probability: f64,
}

impl Default for RandomNetworkConfig {
    fn default() -> Self {
        RandomNetworkConfig {
            min_nodes: 2,
            max_nodes: 8,
            max_states: 4,
            max_parents: 3,
            sparse_row_probability: 0.0,
        }
    }
}

/// A random DAG with random declaration order and Dirichlet(1) CPT rows.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomNetworkConfig) -> BayesianNetwork {
    assert!(cfg.max_states >= 2 && cfg.min_nodes >= 1 && cfg.max_nodes >= cfg.min_nodes);
    let n = rng.random_range(cfg.min_nodes..=cfg.max_nodes);
    let variables: Vec<VariableSpec> = (0..n)
        .map(|i| {
            let k = rng.random_range(2..=cfg.max_states);
            VariableSpec::new(format!("X{i}"), format!("node {i}"), (0..k).map(|s| format!("s{s}")))
                .expect("generated spec")
        })
        .collect();
    // a random causal order, independent of declaration order
    let mut causal: Vec<usize> = (0..n).collect();
    causal.shuffle(rng);
    let mut parents: Vec<(String, Vec<String>)> = Vec::new();
    for (pos, &child) in causal.iter().enumerate() {
        let k = rng.random_range(0..=cfg.max_parents.min(pos));
        let chosen: Vec<String> = causal[..pos]
            .choose_multiple(rng, k)
            .map(|&p| variables[p].id.clone())
            .collect();
        parents.push((variables[child].id.clone(), chosen));
    }
    let dag = Dag::new(variables.iter().map(|v| v.id.clone()), parents).expect("acyclic by construction");
    random_cpts(rng, variables, &dag, cfg.sparse_row_probability)
}

/// Fills a structure with Dirichlet(1) rows.
pub fn random_cpts<R: Rng + ?Sized>(
    rng: &mut R,
    variables: Vec<VariableSpec>,
    dag: &Dag,
    sparse_row_probability: f64,
) -> BayesianNetwork {
    let cpts = variables
        .iter()
        .map(|v| {
            let i = dag.index_of(&v.id).expect("variable in dag");
            let parents: Vec<String> = dag.parents(&v.id).unwrap().iter().map(|s| s.to_string()).collect();
            let rows: usize = dag
                .parent_indices(i)
                .iter()
                .map(|&p| variables[p].cardinality())
                .product();
            let k = v.cardinality();
            let table = (0..rows)
                .map(|_| {
                    let mut row: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
                    if rng.random_bool(sparse_row_probability) {
                        let keep = rng.random_range(0..k);
                        for (s, x) in row.iter_mut().enumerate() {
                            if s != keep && rng.random_bool(0.5) {
                                *x = 0.0;
                            }
                        }
                    }
                    let total: f64 = row.iter().sum();
                    row.iter().map(|x| x / total).collect()
                })
                .collect();
            Cpt::new(&v.id, parents, table).expect("normalized rows")
        })
        .collect();
    BayesianNetwork::new(variables, dag, cpts, BTreeMap::new()).expect("consistent network")
}

/// Random disjoint evidence and target. Evidence items are state sets with
/// probability `set_probability`, singletons otherwise.
pub fn random_query<R: Rng + ?Sized>(
    rng: &mut R,
    net: &BayesianNetwork,
    max_evidence: usize,
    set_probability: f64,
) -> (Evidence, Evidence) {
    let mut order: Vec<usize> = (0..net.len()).collect();
    order.shuffle(rng);
    let target_var = &net.variables()[order[0]];
    let target = Evidence::new().with(
        target_var.id.clone(),
        target_var.states.choose(rng).unwrap().clone(),
    );
    let mut evidence = Evidence::new();
    let n_ev = rng.random_range(0..=max_evidence.min(net.len() - 1));
    for &i in &order[1..=n_ev] {
        let v = &net.variables()[i];
        if rng.random_bool(set_probability) {
            let size = rng.random_range(1..=v.cardinality());
            let states: Vec<String> = v.states.choose_multiple(rng, size).cloned().collect();
            evidence.observe_any(v.id.clone(), states);
        } else {
            evidence.observe(v.id.clone(), v.states.choose(rng).unwrap().clone());
        }
    }
    (evidence, target)
}
