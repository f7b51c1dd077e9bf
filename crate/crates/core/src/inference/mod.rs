//! Exact conditional queries.
//!
//! `query_conditional` runs variable elimination; `enumerate_query` sums the
//! joint over every completion and serves as the ground-truth oracle. Both
//! return the same ratio `P(target, evidence) / P(evidence)`.

mod elimination;
mod factor;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use elimination::EliminationOrder;
pub use factor::Factor;

use crate::model::{for_each_configuration, BayesianNetwork, Evidence, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("evidence has probability zero")]
    ZeroEvidence,
    #[error("variable {0} appears in both evidence and target")]
    Overlap(String),
    #[error("malformed item {0:?}: expected var=state or var=state1|state2")]
    Malformed(String),
}

impl InferenceError {
    pub fn name(&self) -> &'static str {
        match self {
            InferenceError::Model(e) => e.name(),
            InferenceError::ZeroEvidence => "ZeroEvidenceError",
            InferenceError::Overlap(_) => "OverlapError",
            InferenceError::Malformed(_) => "MalformedItem",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Elimination,
    Enumeration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    /// `P(target | evidence)`.
    pub probability: f64,
    /// `P(evidence)`, the normalizing constant.
    pub evidence_probability: f64,
    pub method: Method,
}

/// Posterior distribution of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    pub variable: String,
    pub states: Vec<String>,
    pub probabilities: Vec<f64>,
}

type Masks = Vec<Option<Vec<bool>>>;

fn resolve(
    net: &BayesianNetwork,
    evidence: &Evidence,
    target: &Evidence,
) -> Result<(Masks, Masks), InferenceError> {
    let em = evidence.masks(net)?;
    let tm = target.masks(net)?;
    if let Some(v) = target.variables().find(|v| evidence.contains(v)) {
        return Err(InferenceError::Overlap(v.to_string()));
    }
    Ok((em, tm))
}

/// `P(target | evidence)` by summing the joint over all completions.
/// Exponential in the number of variables.
pub fn enumerate_query(
    net: &BayesianNetwork,
    evidence: &Evidence,
    target: &Evidence,
) -> Result<QueryResult, InferenceError> {
    let (em, tm) = resolve(net, evidence, target)?;
    let allowed = |masks: &Masks, s: &[usize]| {
        masks
            .iter()
            .zip(s)
            .all(|(m, &x)| m.as_ref().is_none_or(|m| m[x]))
    };
    let mut p_evidence = 0.0;
    let mut p_joint = 0.0;
    for_each_configuration(&net.cardinalities(), |s| {
        if !allowed(&em, s) {
            return;
        }
        let p = net.joint_probability_indexed(s);
        p_evidence += p;
        if allowed(&tm, s) {
            p_joint += p;
        }
    });
    if p_evidence <= 0.0 {
        return Err(InferenceError::ZeroEvidence);
    }
    Ok(QueryResult {
        probability: (p_joint / p_evidence).clamp(0.0, 1.0),
        evidence_probability: p_evidence,
        method: Method::Enumeration,
    })
}

/// `P(target | evidence)` by variable elimination with min-fill ordering.
pub fn query_conditional(
    net: &BayesianNetwork,
    evidence: &Evidence,
    target: &Evidence,
) -> Result<QueryResult, InferenceError> {
    query_conditional_with(net, evidence, target, EliminationOrder::MinFill)
}

pub fn query_conditional_with(
    net: &BayesianNetwork,
    evidence: &Evidence,
    target: &Evidence,
    order: EliminationOrder,
) -> Result<QueryResult, InferenceError> {
    let (em, tm) = resolve(net, evidence, target)?;
    let query: Vec<usize> = (0..net.len()).filter(|&i| tm[i].is_some()).collect();
    let table = elimination::joint_table(net, &em, &query, order);
    let total = table.total();
    if total <= 0.0 {
        return Err(InferenceError::ZeroEvidence);
    }
    let target_masks: Vec<&Vec<bool>> = query.iter().map(|&q| tm[q].as_ref().unwrap()).collect();
    let mut joint = 0.0;
    for_each_configuration(table.cards(), |s| {
        if s.iter().zip(&target_masks).all(|(&x, m)| m[x]) {
            let idx = s
                .iter()
                .zip(table.cards())
                .fold(0, |acc, (&x, &c)| acc * c + x);
            joint += table.values()[idx];
        }
    });
    Ok(QueryResult {
        probability: (joint / total).clamp(0.0, 1.0),
        evidence_probability: total * table.log_scale().exp(),
        method: Method::Elimination,
    })
}

/// `P(evidence)` by elimination; zero is a valid answer.
pub fn evidence_probability(net: &BayesianNetwork, evidence: &Evidence) -> Result<f64, InferenceError> {
    let em = evidence.masks(net)?;
    let table = elimination::joint_table(net, &em, &[], EliminationOrder::MinFill);
    Ok(table.total() * table.log_scale().exp())
}

/// Conditional distribution of every variable given the evidence, in network
/// order. Singly observed variables report their state with probability one.
pub fn posterior_marginals(
    net: &BayesianNetwork,
    evidence: &Evidence,
) -> Result<Vec<Marginal>, InferenceError> {
    let em = evidence.masks(net)?;
    if !evidence.is_empty() && evidence_probability(net, evidence)? <= 0.0 {
        return Err(InferenceError::ZeroEvidence);
    }
    let mut out = Vec::with_capacity(net.len());
    for (i, var) in net.variables().iter().enumerate() {
        let probabilities = match &em[i] {
            Some(mask) if mask.iter().filter(|&&m| m).count() == 1 => {
                mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect()
            }
            _ => {
                let table = elimination::joint_table(net, &em, &[i], EliminationOrder::MinFill);
                let total = table.total();
                if total <= 0.0 {
                    return Err(InferenceError::ZeroEvidence);
                }
                table.values().iter().map(|v| v / total).collect()
            }
        };
        out.push(Marginal {
            variable: var.id.clone(),
            states: var.states.clone(),
            probabilities,
        });
    }
    Ok(out)
}

/// Parses one `var=state` or `var=state1|state2` item.
pub fn parse_item(item: &str) -> Result<(String, Vec<String>), InferenceError> {
    let (var, states) = item
        .split_once('=')
        .ok_or_else(|| InferenceError::Malformed(item.to_string()))?;
    let var = var.trim();
    let states: Vec<String> = states.split('|').map(|s| s.trim().to_string()).collect();
    if var.is_empty() || states.iter().any(String::is_empty) {
        return Err(InferenceError::Malformed(item.to_string()));
    }
    Ok((var.to_string(), states))
}

/// Builds evidence from wire items; later items for the same variable win.
pub fn parse_evidence<S: AsRef<str>>(items: &[S]) -> Result<Evidence, InferenceError> {
    let mut ev = Evidence::new();
    for item in items {
        let (var, states) = parse_item(item.as_ref())?;
        ev.observe_any(var, states);
    }
    Ok(ev)
}
