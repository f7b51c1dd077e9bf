//! Discrete Bayesian networks for cardiovascular risk-factor modeling.
//!
//! The crate covers the full pipeline: structure search over discretized
//! health-assessment records, multinomial-Dirichlet parameter learning,
//! exact conditional queries by variable elimination (with an enumeration
//! oracle), and the decision-support analyses built on those queries.

pub mod analysis;
pub mod fixture;
pub mod inference;
pub mod io;
pub mod learning;
pub mod model;
pub mod structure;
pub mod synth;

pub use fixture::cvd_fixture;
pub use io::{Dataset, NetworkDocument};
pub use model::{
    joint_probability, topological_sort, Assignment, BayesianNetwork, Cpt, Dag, Evidence,
    ModelError, VariableSpec,
};
