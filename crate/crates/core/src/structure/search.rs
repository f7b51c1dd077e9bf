use std::cmp::Ordering;
use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::edits::EditKind;
use super::score::FamilyScorer;
use super::StructureError;
use crate::io::Dataset;
use crate::model::Dag;

/// Required and forbidden arcs plus an optional cap on parents per node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureConstraints {
    pub required: BTreeSet<(String, String)>,
    pub forbidden: BTreeSet<(String, String)>,
    pub max_parents: Option<usize>,
}

impl StructureConstraints {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn require(mut self, from: impl Into<String>, to: impl Into<String>) -> Self {
        self.required.insert((from.into(), to.into()));
        self
    }

    pub fn forbid(mut self, from: impl Into<String>, to: impl Into<String>) -> Self {
        self.forbidden.insert((from.into(), to.into()));
        self
    }

    pub fn with_max_parents(mut self, cap: Option<usize>) -> Self {
        self.max_parents = cap;
        self
    }

    /// The graph of required arcs over `nodes`, after checking that the
    /// constraints are mutually consistent.
    pub fn required_graph(&self, nodes: &[String]) -> Result<Dag, StructureError> {
        let fail = |m: String| Err(StructureError::Constraint(m));
        for (from, to) in self.required.iter().chain(&self.forbidden) {
            for id in [from, to] {
                if !nodes.contains(id) {
                    return fail(format!("arc {from} -> {to} names unknown variable {id}"));
                }
            }
            if from == to {
                return fail(format!("self-loop {from} -> {to}"));
            }
        }
        if let Some((f, t)) = self.required.intersection(&self.forbidden).next() {
            return fail(format!("arc {f} -> {t} is both required and forbidden"));
        }
        let mut dag = Dag::empty(nodes.iter().cloned())?;
        for (from, to) in &self.required {
            let (f, t) = (dag.index_of(from).unwrap(), dag.index_of(to).unwrap());
            if dag.insert_arc(f, t).is_err() {
                return fail(format!("required arcs form a cycle through {from} -> {to}"));
            }
        }
        if let Some(cap) = self.max_parents {
            if let Some(i) = (0..dag.len()).find(|&i| dag.parent_indices(i).len() > cap) {
                return fail(format!("{} has more required parents than the cap of {cap}", nodes[i]));
            }
        }
        Ok(dag)
    }

    fn is_required(&self, from: &str, to: &str) -> bool {
        self.required.contains(&(from.to_string(), to.to_string()))
    }

    fn is_forbidden(&self, from: &str, to: &str) -> bool {
        self.forbidden.contains(&(from.to_string(), to.to_string()))
    }
}

/// Parses an arc list: one `FROM TO` pair per line, `#` comments.
pub fn parse_arc_list(text: &str) -> Result<Vec<(String, String)>, StructureError> {
    let mut arcs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        match body.split_whitespace().collect::<Vec<_>>().as_slice() {
            [] => {}
            [from, to] => arcs.push((from.to_string(), to.to_string())),
            _ => {
                return Err(StructureError::Parse {
                    line: n + 1,
                    message: format!("expected `FROM TO`, got `{}`", body.trim()),
                })
            }
        }
    }
    Ok(arcs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Thicken,
    Thin,
}

/// One accepted move of the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub round: usize,
    pub phase: Phase,
    pub kind: EditKind,
    pub from: String,
    pub to: String,
    pub delta: f64,
    pub total_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub dag: Dag,
    pub score: f64,
    pub steps: Vec<SearchStep>,
    /// True when no single arc addition or removal allowed by the
    /// constraints improves the score.
    pub local_optimum: bool,
}

/// Sum of family scores over all nodes of `dag`, whose node list must match
/// the dataset columns.
pub fn total_score(data: &Dataset, dag: &Dag, alpha: f64) -> Result<f64, StructureError> {
    check_columns(data, dag.nodes())?;
    crate::learning::check_alpha(alpha).map_err(|e| StructureError::InvalidFamily(e.to_string()))?;
    Ok(FamilyScorer::new(data, alpha).total(dag))
}

fn check_columns(data: &Dataset, nodes: &[String]) -> Result<(), StructureError> {
    let cols: Vec<&str> = data.variables().iter().map(|v| v.id.as_str()).collect();
    if cols != nodes.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(StructureError::Constraint(
            "graph nodes must match the dataset columns in order".into(),
        ));
    }
    Ok(())
}

struct Candidate {
    from: usize,
    to: usize,
    delta: f64,
}

/// Best strictly improving candidate; equal deltas go to the
/// lexicographically smallest `(from-id, to-id)`.
fn best(cands: Vec<Candidate>, nodes: &[String]) -> Option<Candidate> {
    cands
        .into_iter()
        .filter(|c| c.delta > 0.0)
        .min_by(|a, b| {
            b.delta
                .partial_cmp(&a.delta)
                .unwrap_or(Ordering::Equal)
                .then_with(|| (&nodes[a.from], &nodes[a.to]).cmp(&(&nodes[b.from], &nodes[b.to])))
        })
}

struct Search<'a> {
    scorer: FamilyScorer,
    constraints: &'a StructureConstraints,
    nodes: Vec<String>,
}

impl Search<'_> {
    fn additions(&self, dag: &Dag) -> Vec<Candidate> {
        let n = dag.len();
        let cap = self.constraints.max_parents.unwrap_or(usize::MAX);
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|f| (0..n).map(move |t| (f, t)))
            .filter(|&(f, t)| {
                f != t
                    && !dag.parent_indices(t).contains(&f)
                    && dag.parent_indices(t).len() < cap
                    && !self.constraints.is_forbidden(&self.nodes[f], &self.nodes[t])
                    && !dag.creates_cycle(f, t)
            })
            .collect();
        pairs
            .into_par_iter()
            .map(|(from, to)| {
                let current = dag.parent_indices(to);
                let mut grown = current.to_vec();
                grown.push(from);
                let delta = self.scorer.score(to, &grown) - self.scorer.score(to, current);
                Candidate { from, to, delta }
            })
            .collect()
    }

    fn removals(&self, dag: &Dag) -> Vec<Candidate> {
        let pairs: Vec<(usize, usize)> = (0..dag.len())
            .flat_map(|t| dag.parent_indices(t).iter().map(move |&f| (f, t)))
            .filter(|&(f, t)| !self.constraints.is_required(&self.nodes[f], &self.nodes[t]))
            .collect();
        pairs
            .into_par_iter()
            .map(|(from, to)| {
                let current = dag.parent_indices(to);
                let shrunk: Vec<usize> = current.iter().copied().filter(|&p| p != from).collect();
                let delta = self.scorer.score(to, &shrunk) - self.scorer.score(to, current);
                Candidate { from, to, delta }
            })
            .collect()
    }
}

/// Greedy thick thinning. Starting from the required arcs, the best
/// improving addition is applied until none remains, then the best improving
/// removal until none remains. If thinning changed the graph the two phases
/// run again, so the result admits no improving single-arc move.
pub fn greedy_thick_thinning(
    data: &Dataset,
    constraints: &StructureConstraints,
    alpha: f64,
) -> Result<SearchOutcome, StructureError> {
    if data.width() < 2 {
        return Err(StructureError::Constraint("structure search needs at least 2 variables".into()));
    }
    crate::learning::check_alpha(alpha).map_err(|e| StructureError::InvalidFamily(e.to_string()))?;
    let nodes: Vec<String> = data.variables().iter().map(|v| v.id.clone()).collect();
    let mut dag = constraints.required_graph(&nodes)?;
    let search = Search {
        scorer: FamilyScorer::new(data, alpha),
        constraints,
        nodes,
    };
    let mut total = search.scorer.total(&dag);
    let mut steps = Vec::new();
    let mut round = 0;
    loop {
        round += 1;
        while let Some(c) = best(search.additions(&dag), &search.nodes) {
            dag.insert_arc(c.from, c.to).expect("candidate keeps the graph acyclic");
            total += c.delta;
            steps.push(step(&search.nodes, round, Phase::Thicken, EditKind::Add, &c, total));
        }
        let mut thinned = false;
        while let Some(c) = best(search.removals(&dag), &search.nodes) {
            dag.delete_arc(c.from, c.to);
            total += c.delta;
            thinned = true;
            steps.push(step(&search.nodes, round, Phase::Thin, EditKind::Remove, &c, total));
        }
        if !thinned {
            break;
        }
    }
    let local_optimum = best(search.additions(&dag), &search.nodes).is_none()
        && best(search.removals(&dag), &search.nodes).is_none();
    Ok(SearchOutcome {
        score: search.scorer.total(&dag),
        dag,
        steps,
        local_optimum,
    })
}

fn step(nodes: &[String], round: usize, phase: Phase, kind: EditKind, c: &Candidate, total: f64) -> SearchStep {
    SearchStep {
        round,
        phase,
        kind,
        from: nodes[c.from].clone(),
        to: nodes[c.to].clone(),
        delta: c.delta,
        total_score: total,
    }
}
