//! Core domain types: categorical variables, the DAG, conditional probability
//! tables and the network that ties them together.
//!
//! CPT layout: parent configurations are enumerated in mixed-radix order with
//! the first parent in `parent_order` as the most significant digit; child
//! states index the columns in declared order. The same convention is used by
//! the document format, the learning code and the inference factors.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for a CPT row summing to one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;
/// Tolerance for `probability == count / row_sum` when counts are stored.
pub const COUNT_CONSISTENCY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("directed cycle through node {0}")]
    Cycle(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("unknown state {state:?} for variable {variable}")]
    UnknownState { variable: String, state: String },
    #[error("empty state set for variable {0}")]
    EmptyStateSet(String),
    #[error("assignment does not cover variable {0}")]
    IncompleteAssignment(String),
    #[error("{0}")]
    Validation(String),
}

impl ModelError {
    /// Stable error name used on the CLI and HTTP surfaces.
    pub fn name(&self) -> &'static str {
        match self {
            ModelError::Cycle(_) => "CycleError",
            ModelError::UnknownVariable(_) => "UnknownVariable",
            ModelError::UnknownState { .. } => "UnknownState",
            ModelError::EmptyStateSet(_) => "EmptyStateSet",
            ModelError::IncompleteAssignment(_) => "IncompleteAssignment",
            ModelError::Validation(_) => "ValidationError",
        }
    }
}

fn invalid(msg: impl Into<String>) -> ModelError {
    ModelError::Validation(msg.into())
}

/// A named categorical variable with an ordered list of state labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub id: String,
    pub label: String,
    pub states: Vec<String>,
}

impl VariableSpec {
    pub fn new<S: Into<String>>(
        id: impl Into<String>,
        label: impl Into<String>,
        states: impl IntoIterator<Item = S>,
    ) -> Result<Self, ModelError> {
        let spec = VariableSpec {
            id: id.into(),
            label: label.into(),
            states: states.into_iter().map(Into::into).collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.id.is_empty() {
            return Err(invalid("variable id must be non-empty"));
        }
        if self.states.len() < 2 {
            return Err(invalid(format!(
                "variable {} needs at least two states, has {}",
                self.id,
                self.states.len()
            )));
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.is_empty() {
                return Err(invalid(format!("variable {} has an empty state label", self.id)));
            }
            if self.states[..i].contains(s) {
                return Err(invalid(format!("variable {} repeats state {:?}", self.id, s)));
            }
        }
        Ok(())
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Directed acyclic graph over variable ids.
///
/// Parent lists keep their given order; that order is the CPT parent order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
}

impl Dag {
    /// A graph with the given nodes and no arcs.
    pub fn empty<S: Into<String>>(nodes: impl IntoIterator<Item = S>) -> Result<Self, ModelError> {
        Self::new(nodes, std::iter::empty::<(String, Vec<String>)>())
    }

    /// Builds and validates a graph. Nodes absent from `parents` have no parents.
    pub fn new<S, K, P>(
        nodes: impl IntoIterator<Item = S>,
        parents: impl IntoIterator<Item = (K, Vec<P>)>,
    ) -> Result<Self, ModelError>
    where
        S: Into<String>,
        K: AsRef<str>,
        P: AsRef<str>,
    {
        let nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if n.is_empty() {
                return Err(invalid("node id must be non-empty"));
            }
            if index.insert(n.clone(), i).is_some() {
                return Err(invalid(format!("duplicate node {n}")));
            }
        }
        let mut parent_idx = vec![Vec::new(); nodes.len()];
        let mut seen = vec![false; nodes.len()];
        for (child, ps) in parents {
            let child = child.as_ref();
            let c = *index
                .get(child)
                .ok_or_else(|| invalid(format!("unknown node {child} in parent map")))?;
            if seen[c] {
                return Err(invalid(format!("node {child} listed twice in parent map")));
            }
            seen[c] = true;
            for p in ps {
                let p = p.as_ref();
                let pi = *index
                    .get(p)
                    .ok_or_else(|| invalid(format!("unknown parent id {p} of {child}")))?;
                if pi == c {
                    return Err(ModelError::Cycle(child.to_string()));
                }
                if parent_idx[c].contains(&pi) {
                    return Err(invalid(format!("duplicate parent {p} of {child}")));
                }
                parent_idx[c].push(pi);
            }
        }
        let dag = Dag {
            nodes,
            index,
            parents: parent_idx,
        };
        dag.topological_indices()?;
        Ok(dag)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn parent_indices(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    /// Parent ids of `id` in CPT order.
    pub fn parents(&self, id: &str) -> Option<Vec<&str>> {
        let i = self.index_of(id)?;
        Some(self.parents[i].iter().map(|&p| self.nodes[p].as_str()).collect())
    }

    /// Map from node id to its ordered parent ids.
    pub fn parent_map(&self) -> BTreeMap<String, Vec<String>> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                (
                    n.clone(),
                    self.parents[i].iter().map(|&p| self.nodes[p].clone()).collect(),
                )
            })
            .collect()
    }

    pub fn children_indices(&self, node: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.parents[c].contains(&node)).collect()
    }

    pub fn has_arc(&self, from: &str, to: &str) -> bool {
        match (self.index_of(from), self.index_of(to)) {
            (Some(f), Some(t)) => self.parents[t].contains(&f),
            _ => false,
        }
    }

    /// All arcs as `(from, to)` id pairs, sorted.
    pub fn arcs(&self) -> Vec<(String, String)> {
        let mut arcs: Vec<_> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| {
                ps.iter()
                    .map(move |&p| (self.nodes[p].clone(), self.nodes[c].clone()))
            })
            .collect();
        arcs.sort();
        arcs
    }

    pub fn arc_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// True when `target` can be reached from `source` along directed arcs.
    pub fn reaches(&self, source: usize, target: usize) -> bool {
        if source == target {
            return true;
        }
        let mut stack = vec![source];
        let mut seen = vec![false; self.len()];
        seen[source] = true;
        while let Some(n) = stack.pop() {
            for (c, parents) in self.parents.iter().enumerate() {
                if !seen[c] && parents.contains(&n) {
                    if c == target {
                        return true;
                    }
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        false
    }

    /// Whether adding `from -> to` would close a directed cycle.
    pub fn creates_cycle(&self, from: usize, to: usize) -> bool {
        self.reaches(to, from)
    }

    /// Adds an arc by index. The new parent is placed before the first
    /// existing parent declared later than it, so declaration-ordered parent
    /// lists stay declaration-ordered.
    pub(crate) fn insert_arc(&mut self, from: usize, to: usize) -> Result<(), ModelError> {
        if self.parents[to].contains(&from) {
            return Err(invalid(format!(
                "arc {} -> {} already present",
                self.nodes[from], self.nodes[to]
            )));
        }
        if self.creates_cycle(from, to) {
            return Err(ModelError::Cycle(self.nodes[to].clone()));
        }
        let pos = self.parents[to]
            .iter()
            .position(|&p| p > from)
            .unwrap_or(self.parents[to].len());
        self.parents[to].insert(pos, from);
        Ok(())
    }

    pub(crate) fn delete_arc(&mut self, from: usize, to: usize) -> bool {
        match self.parents[to].iter().position(|&p| p == from) {
            Some(pos) => {
                self.parents[to].remove(pos);
                true
            }
            None => false,
        }
    }

    /// Kahn's algorithm, lowest declaration index first among ready nodes.
    pub fn topological_indices(&self) -> Result<Vec<usize>, ModelError> {
        let n = self.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut children = vec![Vec::new(); n];
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&next) = ready.iter().next() {
            ready.remove(&next);
            order.push(next);
            for &c in &children[next] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == n {
            return Ok(order);
        }
        // Walk parents inside the unresolved set until a node repeats; that
        // node lies on a cycle.
        let mut visited = vec![false; n];
        let mut cur = (0..n).find(|&i| indegree[i] > 0).expect("unresolved node");
        loop {
            if visited[cur] {
                return Err(ModelError::Cycle(self.nodes[cur].clone()));
            }
            visited[cur] = true;
            cur = *self.parents[cur]
                .iter()
                .find(|&&p| indegree[p] > 0)
                .expect("unresolved node has an unresolved parent");
        }
    }
}

/// Variable ids ordered so that every parent precedes its children.
pub fn topological_sort(dag: &Dag) -> Result<Vec<String>, ModelError> {
    Ok(dag
        .topological_indices()?
        .into_iter()
        .map(|i| dag.nodes[i].clone())
        .collect())
}

/// Conditional probability table of one variable given its parents.
///
/// Values are stored flat, row-major: `row * cardinality + state`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    variable: String,
    parent_order: Vec<String>,
    cardinality: usize,
    probabilities: Vec<f64>,
    counts: Option<Vec<f64>>,
}

impl Cpt {
    /// A table of point-estimate probability rows.
    pub fn new(
        variable: impl Into<String>,
        parent_order: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let variable = variable.into();
        let (cardinality, probabilities) = flatten_rows(&variable, rows)?;
        let cpt = Cpt {
            variable,
            parent_order,
            cardinality,
            probabilities,
            counts: None,
        };
        cpt.check_values()?;
        Ok(cpt)
    }

    /// A table whose probabilities are the normalized Dirichlet pseudo-counts.
    pub fn from_counts(
        variable: impl Into<String>,
        parent_order: Vec<String>,
        counts: Vec<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let variable = variable.into();
        let (cardinality, counts) = flatten_rows(&variable, counts)?;
        let mut probabilities = Vec::with_capacity(counts.len());
        for row in counts.chunks(cardinality) {
            let total: f64 = row.iter().sum();
            probabilities.extend(row.iter().map(|c| c / total));
        }
        let cpt = Cpt {
            variable,
            parent_order,
            cardinality,
            probabilities,
            counts: Some(counts),
        };
        cpt.check_values()?;
        Ok(cpt)
    }

    /// Both probability rows and count rows, checked for consistency.
    pub fn with_counts(
        variable: impl Into<String>,
        parent_order: Vec<String>,
        rows: Vec<Vec<f64>>,
        counts: Vec<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let variable = variable.into();
        let (cardinality, probabilities) = flatten_rows(&variable, rows)?;
        let (count_card, counts) = flatten_rows(&variable, counts)?;
        if count_card != cardinality || counts.len() != probabilities.len() {
            return Err(invalid(format!(
                "CPT {variable}: count rows do not match probability rows in shape"
            )));
        }
        let cpt = Cpt {
            variable,
            parent_order,
            cardinality,
            probabilities,
            counts: Some(counts),
        };
        cpt.check_values()?;
        Ok(cpt)
    }

    fn check_values(&self) -> Result<(), ModelError> {
        let v = &self.variable;
        for (r, row) in self.probabilities.chunks(self.cardinality).enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
                return Err(invalid(format!("CPT {v} row {r} has an entry outside [0,1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(invalid(format!("CPT {v} row {r} sums to {sum}, not 1")));
            }
        }
        if let Some(counts) = &self.counts {
            for (r, row) in counts.chunks(self.cardinality).enumerate() {
                if row.iter().any(|c| !c.is_finite() || *c <= 0.0) {
                    return Err(invalid(format!(
                        "CPT {v} count row {r} has a non-positive entry"
                    )));
                }
                let total: f64 = row.iter().sum();
                let probs = &self.probabilities[r * self.cardinality..(r + 1) * self.cardinality];
                for (c, p) in row.iter().zip(probs) {
                    if (c / total - p).abs() > COUNT_CONSISTENCY_TOLERANCE {
                        return Err(invalid(format!(
                            "CPT {v} row {r}: probability {p} disagrees with counts"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn parent_order(&self) -> &[String] {
        &self.parent_order
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn row_count(&self) -> usize {
        self.probabilities.len() / self.cardinality
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.probabilities[r * self.cardinality..(r + 1) * self.cardinality]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probabilities.chunks(self.cardinality)
    }

    /// Flat row-major probability values.
    pub fn values(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn has_counts(&self) -> bool {
        self.counts.is_some()
    }

    pub fn count_row(&self, r: usize) -> Option<&[f64]> {
        self.counts
            .as_ref()
            .map(|c| &c[r * self.cardinality..(r + 1) * self.cardinality])
    }

    pub fn count_rows(&self) -> Option<impl Iterator<Item = &[f64]>> {
        self.counts.as_ref().map(|c| c.chunks(self.cardinality))
    }

    /// A copy without the count rows.
    pub fn without_counts(&self) -> Cpt {
        Cpt {
            counts: None,
            ..self.clone()
        }
    }
}

fn flatten_rows(variable: &str, rows: Vec<Vec<f64>>) -> Result<(usize, Vec<f64>), ModelError> {
    let cardinality = rows.first().map(Vec::len).unwrap_or(0);
    if cardinality == 0 {
        return Err(invalid(format!("CPT {variable} has no rows or empty rows")));
    }
    let mut flat = Vec::with_capacity(rows.len() * cardinality);
    for (r, row) in rows.into_iter().enumerate() {
        if row.len() != cardinality {
            return Err(invalid(format!(
                "CPT {variable} row {r} has {} entries, expected {cardinality}",
                row.len()
            )));
        }
        flat.extend(row);
    }
    Ok((cardinality, flat))
}

/// Variables, DAG, one CPT per variable, and free-form provenance notes.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesianNetwork {
    variables: Vec<VariableSpec>,
    dag: Dag,
    cpts: Vec<Cpt>,
    notes: BTreeMap<String, String>,
}

impl BayesianNetwork {
    /// Validates every cross-structure invariant. The DAG is re-indexed to the
    /// variable order and the CPTs may be given in any order.
    pub fn new(
        variables: Vec<VariableSpec>,
        dag: &Dag,
        cpts: Vec<Cpt>,
        notes: BTreeMap<String, String>,
    ) -> Result<Self, ModelError> {
        for v in &variables {
            v.validate()?;
        }
        let ids: Vec<&str> = variables.iter().map(|v| v.id.as_str()).collect();
        if dag.len() != ids.len() || ids.iter().any(|id| !dag.contains(id)) {
            return Err(invalid("variable set and DAG node set differ"));
        }
        let parent_map = dag.parent_map();
        let dag = Dag::new(ids.iter().copied(), parent_map.iter().map(|(k, v)| (k, v.clone())))?;

        let mut slots: Vec<Option<Cpt>> = vec![None; variables.len()];
        for cpt in cpts {
            let i = dag
                .index_of(&cpt.variable)
                .ok_or_else(|| invalid(format!("CPT for unknown variable {}", cpt.variable)))?;
            if slots[i].is_some() {
                return Err(invalid(format!("two CPTs for variable {}", cpt.variable)));
            }
            slots[i] = Some(cpt);
        }
        let mut ordered = Vec::with_capacity(slots.len());
        for (i, slot) in slots.into_iter().enumerate() {
            let var = &variables[i];
            let cpt = slot.ok_or_else(|| invalid(format!("missing CPT for {}", var.id)))?;
            let expected: Vec<&str> = dag.parents(&var.id).expect("node present");
            if cpt.parent_order.iter().map(String::as_str).ne(expected.iter().copied()) {
                return Err(invalid(format!(
                    "CPT {} parent order {:?} differs from DAG parents {:?}",
                    var.id, cpt.parent_order, expected
                )));
            }
            if cpt.cardinality != var.cardinality() {
                return Err(invalid(format!(
                    "CPT {} has {} columns, variable has {} states",
                    var.id,
                    cpt.cardinality,
                    var.cardinality()
                )));
            }
            let rows: usize = dag
                .parent_indices(i)
                .iter()
                .map(|&p| variables[p].cardinality())
                .product();
            if cpt.row_count() != rows {
                return Err(invalid(format!(
                    "CPT {} has {} rows, expected {rows}",
                    var.id,
                    cpt.row_count()
                )));
            }
            ordered.push(cpt);
        }
        Ok(BayesianNetwork {
            variables,
            dag,
            cpts: ordered,
            notes,
        })
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn variable(&self, id: &str) -> Option<&VariableSpec> {
        self.dag.index_of(id).map(|i| &self.variables[i])
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.dag.index_of(id)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, id: &str) -> Option<&Cpt> {
        self.dag.index_of(id).map(|i| &self.cpts[i])
    }

    pub fn notes(&self) -> &BTreeMap<String, String> {
        &self.notes
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(VariableSpec::cardinality).collect()
    }

    /// Row index into variable `node`'s CPT for a full state vector.
    pub fn cpt_row_index(&self, node: usize, states: &[usize]) -> usize {
        self.dag
            .parent_indices(node)
            .iter()
            .fold(0, |acc, &p| acc * self.variables[p].cardinality() + states[p])
    }

    /// Joint probability of a full state-index vector in network variable order.
    pub fn joint_probability_indexed(&self, states: &[usize]) -> f64 {
        let mut p = 1.0;
        for (i, cpt) in self.cpts.iter().enumerate() {
            p *= cpt.row(self.cpt_row_index(i, states))[states[i]];
            if p == 0.0 {
                break;
            }
        }
        p
    }

    pub fn with_notes(mut self, notes: BTreeMap<String, String>) -> Self {
        self.notes = notes;
        self
    }

    /// Resolves `var -> state` to an index, with the usual error variants.
    pub fn state_index(&self, var: &str, state: &str) -> Result<(usize, usize), ModelError> {
        let i = self
            .index_of(var)
            .ok_or_else(|| ModelError::UnknownVariable(var.to_string()))?;
        let s = self.variables[i]
            .state_index(state)
            .ok_or_else(|| ModelError::UnknownState {
                variable: var.to_string(),
                state: state.to_string(),
            })?;
        Ok((i, s))
    }
}

/// Observed evidence: each variable mapped to a non-empty set of allowed
/// states. A singleton set is ordinary evidence; larger sets condition on the
/// disjunction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    entries: BTreeMap<String, Vec<String>>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Observes a single state, replacing any previous entry for `var`.
    pub fn observe(&mut self, var: impl Into<String>, state: impl Into<String>) -> &mut Self {
        self.entries.insert(var.into(), vec![state.into()]);
        self
    }

    /// Observes that `var` is one of `states`, replacing any previous entry.
    pub fn observe_any<S: Into<String>>(
        &mut self,
        var: impl Into<String>,
        states: impl IntoIterator<Item = S>,
    ) -> &mut Self {
        let mut set: Vec<String> = Vec::new();
        for s in states {
            let s = s.into();
            if !set.contains(&s) {
                set.push(s);
            }
        }
        self.entries.insert(var.into(), set);
        self
    }

    pub fn with(mut self, var: impl Into<String>, state: impl Into<String>) -> Self {
        self.observe(var, state);
        self
    }

    pub fn with_any<S: Into<String>>(
        mut self,
        var: impl Into<String>,
        states: impl IntoIterator<Item = S>,
    ) -> Self {
        self.observe_any(var, states);
        self
    }

    pub fn remove(&mut self, var: &str) -> Option<Vec<String>> {
        self.entries.remove(var)
    }

    pub fn without(&self, var: &str) -> Self {
        let mut e = self.clone();
        e.entries.remove(var);
        e
    }

    pub fn get(&self, var: &str) -> Option<&[String]> {
        self.entries.get(var).map(Vec::as_slice)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.entries.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Resolves to one state mask per network variable (`None` = unobserved).
    pub fn masks(&self, net: &BayesianNetwork) -> Result<Vec<Option<Vec<bool>>>, ModelError> {
        let mut masks = vec![None; net.len()];
        for (var, states) in &self.entries {
            let i = net
                .index_of(var)
                .ok_or_else(|| ModelError::UnknownVariable(var.clone()))?;
            if states.is_empty() {
                return Err(ModelError::EmptyStateSet(var.clone()));
            }
            let mut mask = vec![false; net.variables()[i].cardinality()];
            for s in states {
                let (_, si) = net.state_index(var, s)?;
                mask[si] = true;
            }
            masks[i] = Some(mask);
        }
        Ok(masks)
    }

    pub fn validate(&self, net: &BayesianNetwork) -> Result<(), ModelError> {
        self.masks(net).map(|_| ())
    }
}

impl Serialize for Evidence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            if v.len() == 1 {
                map.serialize_entry(k, &v[0])?;
            } else {
                map.serialize_entry(k, v)?;
            }
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Evidence {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum OneOrMany {
            One(String),
            Many(Vec<String>),
        }
        let raw = BTreeMap::<String, OneOrMany>::deserialize(deserializer)?;
        let mut ev = Evidence::new();
        for (k, v) in raw {
            match v {
                OneOrMany::One(s) => ev.observe(k, s),
                OneOrMany::Many(s) => ev.observe_any(k, s),
            };
        }
        Ok(ev)
    }
}

impl std::fmt::Display for Evidence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (k, v) in &self.entries {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{}={}", k, v.join("|"))?;
        }
        Ok(())
    }
}

/// A total assignment of every network variable to one state label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment(pub BTreeMap<String, String>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: impl Into<String>, state: impl Into<String>) -> Self {
        self.0.insert(var.into(), state.into());
        self
    }

    /// State indices in network order; fails on unknown or missing entries.
    pub fn indices(&self, net: &BayesianNetwork) -> Result<Vec<usize>, ModelError> {
        let mut states = vec![usize::MAX; net.len()];
        for (var, state) in &self.0 {
            let (i, s) = net.state_index(var, state)?;
            states[i] = s;
        }
        if let Some(i) = states.iter().position(|&s| s == usize::MAX) {
            return Err(ModelError::IncompleteAssignment(net.variables()[i].id.clone()));
        }
        Ok(states)
    }
}

/// Product of the matching CPT entries for a total assignment.
pub fn joint_probability(net: &BayesianNetwork, assignment: &Assignment) -> Result<f64, ModelError> {
    Ok(net.joint_probability_indexed(&assignment.indices(net)?))
}

/// Iterates all state vectors of the given cardinalities in mixed-radix
/// order, last position fastest.
pub(crate) fn for_each_configuration(cards: &[usize], mut f: impl FnMut(&[usize])) {
    if cards.contains(&0) {
        return;
    }
    let mut states = vec![0usize; cards.len()];
    loop {
        f(&states);
        let mut pos = cards.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            states[pos] += 1;
            if states[pos] < cards[pos] {
                break;
            }
            states[pos] = 0;
        }
    }
}
