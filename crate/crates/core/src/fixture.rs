//! The 13-variable cardiovascular risk-factor network.
//!
//! Structure and state sets are the published ones. Only the sleep-duration
//! table (`v7 | v2`) has published values; every other CPT is a uniform
//! placeholder, flagged in the notes under `placeholder_cpts`.

use std::collections::BTreeMap;

use crate::model::{BayesianNetwork, Cpt, Dag, VariableSpec};

/// Node class used for display grouping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    NonModifiable,
    Modifiable,
    MedicalCondition,
}

impl NodeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeClass::NonModifiable => "non-modifiable",
            NodeClass::Modifiable => "modifiable",
            NodeClass::MedicalCondition => "medical-condition",
        }
    }
}

const YES_NO: [&str; 2] = ["yes", "no"];

/// `(id, label, states, class)` for v1..v13.
pub fn variable_table() -> Vec<(&'static str, &'static str, Vec<&'static str>, NodeClass)> {
    use NodeClass::*;
    vec![
        ("v1", "Sex", vec!["female", "male"], NonModifiable),
        (
            "v2",
            "Age",
            vec!["[18-24]", "(24-34]", "(34-44]", "(44-54]", "(54-64]", "(64-74]"],
            NonModifiable,
        ),
        ("v3", "Education level", vec!["1", "2", "3"], NonModifiable),
        ("v4", "Socioeconomic status", vec!["1", "2", "3"], NonModifiable),
        ("v5", "Body mass index", vec!["underw.", "normal", "overw.", "obese"], Modifiable),
        ("v6", "Physical activity", vec!["1", "2"], Modifiable),
        ("v7", "Sleep duration", vec!["<6h", "6h-9h", ">9h"], Modifiable),
        ("v8", "Smoker profile", vec!["non-smoker", "ex-smoker", "smoker"], Modifiable),
        ("v9", "Anxiety", YES_NO.to_vec(), Modifiable),
        ("v10", "Depression", YES_NO.to_vec(), Modifiable),
        ("v11", "Hypertension", YES_NO.to_vec(), MedicalCondition),
        ("v12", "Hypercholesterolemia", YES_NO.to_vec(), MedicalCondition),
        ("v13", "Diabetes", YES_NO.to_vec(), MedicalCondition),
    ]
}

/// Parent sets of the published factorization, in CPT order.
pub fn parent_sets() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("v1", vec![]),
        ("v2", vec![]),
        ("v3", vec!["v1", "v8"]),
        ("v4", vec!["v1", "v2", "v3", "v5", "v6", "v8"]),
        ("v5", vec!["v2", "v6", "v8"]),
        ("v6", vec!["v1", "v2", "v7", "v8"]),
        ("v7", vec!["v2"]),
        ("v8", vec!["v1", "v2"]),
        ("v9", vec!["v1", "v7", "v10", "v11"]),
        ("v10", vec!["v1", "v3"]),
        ("v11", vec!["v5", "v6", "v7"]),
        ("v12", vec!["v1", "v2", "v3", "v6", "v7", "v8"]),
        ("v13", vec!["v1", "v2", "v6"]),
    ]
}

/// Sleep duration given age group: one row per age state, columns
/// `<6h`, `6h-9h`, `>9h`.
pub const SLEEP_GIVEN_AGE: [[f64; 3]; 6] = [
    [0.0467, 0.9498, 0.0035],
    [0.0694, 0.9293, 0.0013],
    [0.1016, 0.8977, 0.0007],
    [0.1350, 0.8643, 0.0007],
    [0.1730, 0.8261, 0.0009],
    [0.1964, 0.8033, 0.0003],
];

pub fn variables() -> Vec<VariableSpec> {
    variable_table()
        .into_iter()
        .map(|(id, label, states, _)| VariableSpec::new(id, label, states).expect("fixture spec"))
        .collect()
}

pub fn dag() -> Dag {
    let ids: Vec<&str> = variable_table().iter().map(|v| v.0).collect();
    Dag::new(ids, parent_sets()).expect("fixture dag")
}

/// Fixture notes: node classes and the list of placeholder tables.
pub fn notes() -> BTreeMap<String, String> {
    let mut notes = BTreeMap::new();
    for (id, _, _, class) in variable_table() {
        notes.insert(format!("class.{id}"), class.as_str().to_string());
    }
    let placeholders: Vec<&str> = variable_table()
        .iter()
        .map(|v| v.0)
        .filter(|&id| id != "v7")
        .collect();
    notes.insert("placeholder_cpts".into(), placeholders.join(","));
    notes.insert(
        "source".into(),
        "published structure; v7 table published; other tables uniform placeholders".into(),
    );
    notes
}

/// Variables and DAG only.
pub fn cvd_metadata() -> (Vec<VariableSpec>, Dag) {
    (variables(), dag())
}

/// The full fixture network.
pub fn cvd_fixture() -> BayesianNetwork {
    let vars = variables();
    let dag = dag();
    let cpts = vars
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let parents: Vec<String> = dag.parents(&v.id).unwrap().iter().map(|s| s.to_string()).collect();
            if v.id == "v7" {
                let rows = SLEEP_GIVEN_AGE.iter().map(|r| r.to_vec()).collect();
                return Cpt::new(&v.id, parents, rows).expect("v7 table");
            }
            let rows: usize = dag
                .parent_indices(i)
                .iter()
                .map(|&p| vars[p].cardinality())
                .product();
            let k = v.cardinality();
            Cpt::new(&v.id, parents, vec![vec![1.0 / k as f64; k]; rows]).expect("uniform table")
        })
        .collect();
    BayesianNetwork::new(vars, &dag, cpts, notes()).expect("fixture network")
}
