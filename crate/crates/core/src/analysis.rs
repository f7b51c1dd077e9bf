//! Decision-support procedures on top of exact inference: influence of each
//! finding, what-if improvement tables, prevalence by group and Beta
//! posterior comparisons.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::{query_conditional, InferenceError};
use crate::learning::PosteriorCpts;
use crate::model::{BayesianNetwork, Evidence, ModelError};

pub const DEFAULT_COMPARISON_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("at least one evidence item is required")]
    NoEvidence,
    #[error("improvement variable {0} is not part of the base case")]
    NotInBase(String),
    #[error("improvement {variable}={state} equals the base state")]
    SameState { variable: String, state: String },
    #[error("bad cell address: {0}")]
    BadAddress(String),
    #[error("Beta parameters must be positive and finite, got ({0}, {1})")]
    InvalidBeta(f64, f64),
    #[error("sample count must be at least 1")]
    NoSamples,
}

impl AnalysisError {
    pub fn name(&self) -> &'static str {
        match self {
            AnalysisError::Inference(e) => e.name(),
            AnalysisError::NoEvidence => "NoEvidenceError",
            AnalysisError::NotInBase(_) => "NotInBase",
            AnalysisError::SameState { .. } => "SameState",
            AnalysisError::BadAddress(_) => "BadAddress",
            AnalysisError::InvalidBeta(..) => "InvalidBeta",
            AnalysisError::NoSamples => "NoSamples",
        }
    }
}

impl From<ModelError> for AnalysisError {
    fn from(e: ModelError) -> Self {
        AnalysisError::Inference(e.into())
    }
}

/// Effect of dropping one evidence item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceRow {
    pub variable: String,
    pub states: Vec<String>,
    /// Target probability without this item; absent when that query failed.
    pub probability: Option<f64>,
    /// `base_probability - probability`.
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub evidence: Evidence,
    pub target: Evidence,
    pub base_probability: f64,
    /// Sorted by |delta| descending, ties by variable id; failed rows last.
    pub rows: Vec<InfluenceRow>,
    pub most_influential: Option<String>,
}

/// Recomputes the target probability with each evidence item removed in turn.
pub fn influential_findings(
    net: &BayesianNetwork,
    evidence: &Evidence,
    target: &Evidence,
) -> Result<InfluenceReport, AnalysisError> {
    if evidence.is_empty() {
        return Err(AnalysisError::NoEvidence);
    }
    let base = query_conditional(net, evidence, target)?.probability;
    let mut rows: Vec<InfluenceRow> = evidence
        .iter()
        .map(|(var, states)| {
            let reduced = evidence.without(var);
            let (probability, error) = match query_conditional(net, &reduced, target) {
                Ok(r) => (Some(r.probability), None),
                Err(e) => (None, Some(format!("{}: {e}", e.name()))),
            };
            InfluenceRow {
                variable: var.to_string(),
                states: states.to_vec(),
                probability,
                delta: probability.map(|p| base - p),
                error,
            }
        })
        .collect();
    rows.sort_by(|a, b| match (a.delta, b.delta) {
        (Some(x), Some(y)) => y.abs().total_cmp(&x.abs()).then_with(|| a.variable.cmp(&b.variable)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.variable.cmp(&b.variable),
    });
    let most_influential = rows.first().filter(|r| r.delta.is_some()).map(|r| r.variable.clone());
    Ok(InfluenceReport {
        evidence: evidence.clone(),
        target: target.clone(),
        base_probability: base,
        rows,
        most_influential,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfRow {
    pub variable: String,
    pub base_states: Vec<String>,
    pub improved_state: String,
    pub probability: f64,
    /// `probability - base_probability`.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedRow {
    pub improvements: Vec<(String, String)>,
    pub probability: f64,
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfTable {
    pub base: Evidence,
    pub target: Evidence,
    pub base_probability: f64,
    pub rows: Vec<WhatIfRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combined: Option<CombinedRow>,
}

/// One row per improvement replacing that variable's base state, plus an
/// optional row with every improvement applied at once.
pub fn whatif_improvements(
    net: &BayesianNetwork,
    base: &Evidence,
    improvements: &[(String, String)],
    target: &Evidence,
    combined: bool,
) -> Result<WhatIfTable, AnalysisError> {
    for (var, state) in improvements {
        let current = base.get(var).ok_or_else(|| AnalysisError::NotInBase(var.clone()))?;
        net.state_index(var, state)?;
        if current == [state.clone()] {
            return Err(AnalysisError::SameState {
                variable: var.clone(),
                state: state.clone(),
            });
        }
    }
    let base_probability = query_conditional(net, base, target)?.probability;
    let rows = improvements
        .iter()
        .map(|(var, state)| {
            let p = query_conditional(net, &base.clone().with(var, state), target)?.probability;
            Ok(WhatIfRow {
                variable: var.clone(),
                base_states: base.get(var).unwrap_or_default().to_vec(),
                improved_state: state.clone(),
                probability: p,
                change: p - base_probability,
            })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let combined = if combined {
        let all = improvements
            .iter()
            .fold(base.clone(), |ev, (v, s)| ev.with(v, s));
        let p = query_conditional(net, &all, target)?.probability;
        Some(CombinedRow {
            improvements: improvements.to_vec(),
            probability: p,
            change: p - base_probability,
        })
    } else {
        None
    };
    Ok(WhatIfTable {
        base: base.clone(),
        target: target.clone(),
        base_probability,
        rows,
        combined,
    })
}

/// Outcome probabilities conditioned on each state of a grouping variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceTable {
    pub group: String,
    pub group_states: Vec<String>,
    /// Column headers, `var=state` form.
    pub outcomes: Vec<String>,
    /// `cells[g][t] = P(outcome t | group = g)`.
    pub cells: Vec<Vec<f64>>,
}

pub fn prevalence_table(
    net: &BayesianNetwork,
    group: &str,
    outcomes: &[(String, Vec<String>)],
) -> Result<PrevalenceTable, AnalysisError> {
    let spec = net
        .variable(group)
        .ok_or_else(|| ModelError::UnknownVariable(group.to_string()))?;
    if outcomes.iter().any(|(v, _)| v == group) {
        return Err(InferenceError::Overlap(group.to_string()).into());
    }
    let targets: Vec<Evidence> = outcomes
        .iter()
        .map(|(v, s)| Evidence::new().with_any(v, s.clone()))
        .collect();
    let cells = spec
        .states
        .iter()
        .map(|g| {
            let ev = Evidence::new().with(group, g);
            targets
                .iter()
                .map(|t| Ok(query_conditional(net, &ev, t)?.probability))
                .collect::<Result<Vec<f64>, AnalysisError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PrevalenceTable {
        group: group.to_string(),
        group_states: spec.states.clone(),
        outcomes: targets.iter().map(|t| t.to_string()).collect(),
        cells,
    })
}

/// Posterior of a proportion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPosterior {
    pub a: f64,
    pub b: f64,
}

impl BetaPosterior {
    pub fn new(a: f64, b: f64) -> Result<Self, AnalysisError> {
        if a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 {
            Ok(BetaPosterior { a, b })
        } else {
            Err(AnalysisError::InvalidBeta(a, b))
        }
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    fn distribution(&self) -> Beta<f64> {
        Beta::new(self.a, self.b).expect("validated parameters")
    }
}

impl fmt::Display for BetaPosterior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Beta({}, {})", self.a, self.b)
    }
}

/// Monte Carlo estimate of `P(theta1 > theta2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionComparison {
    pub first: BetaPosterior,
    pub second: BetaPosterior,
    pub probability: f64,
    pub standard_error: f64,
    pub samples: u64,
    pub greater: u64,
    pub ties: u64,
    pub seed: u64,
}

/// Draws `samples` pairs and counts how often the first proportion is the
/// larger, ties counting one half. Each distribution draws from its own
/// ChaCha stream, assigned by the order of the parameter pairs rather than
/// the argument order, so swapping the arguments reuses the same pairs and
/// the two estimates sum to one.
pub fn compare_proportions(
    first: BetaPosterior,
    second: BetaPosterior,
    samples: u64,
    seed: u64,
) -> Result<ProportionComparison, AnalysisError> {
    if samples == 0 {
        return Err(AnalysisError::NoSamples);
    }
    let key = |p: &BetaPosterior| (p.a.to_bits(), p.b.to_bits());
    let (s1, s2) = if key(&first) <= key(&second) { (0, 1) } else { (1, 0) };
    let stream = |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s);
        rng
    };
    let (mut r1, mut r2) = (stream(s1), stream(s2));
    let (d1, d2) = (first.distribution(), second.distribution());
    let (mut greater, mut ties) = (0u64, 0u64);
    for _ in 0..samples {
        let x: f64 = d1.sample(&mut r1);
        let y: f64 = d2.sample(&mut r2);
        if x > y {
            greater += 1;
        } else if x == y {
            ties += 1;
        }
    }
    let probability = (2 * greater + ties) as f64 / (2 * samples) as f64;
    Ok(ProportionComparison {
        first,
        second,
        probability,
        standard_error: (probability * (1.0 - probability) / samples as f64).sqrt(),
        samples,
        greater,
        ties,
        seed,
    })
}

/// Marginal Beta of one Dirichlet cell: `Beta(a_k, sum(a) - a_k)`.
/// `parent_states` maps each parent of `variable` to a state label.
pub fn beta_from_cell(
    posterior: &PosteriorCpts,
    variable: &str,
    parent_states: &BTreeMap<String, String>,
    state: &str,
) -> Result<BetaPosterior, AnalysisError> {
    let net = posterior.network();
    let bad = |m: String| AnalysisError::BadAddress(m);
    let node = net
        .index_of(variable)
        .ok_or_else(|| bad(format!("unknown variable {variable}")))?;
    let cpt = &net.cpts()[node];
    if let Some(extra) = parent_states.keys().find(|k| !cpt.parent_order().contains(k)) {
        return Err(bad(format!("{extra} is not a parent of {variable}")));
    }
    let mut row = 0;
    for p in cpt.parent_order() {
        let label = parent_states
            .get(p)
            .ok_or_else(|| bad(format!("missing state for parent {p}")))?;
        let (pi, si) = net
            .state_index(p, label)
            .map_err(|_| bad(format!("unknown state {label:?} of {p}")))?;
        row = row * net.variables()[pi].cardinality() + si;
    }
    let k = net.variables()[node]
        .state_index(state)
        .ok_or_else(|| bad(format!("unknown state {state:?} of {variable}")))?;
    let counts = cpt
        .count_row(row)
        .ok_or_else(|| bad(format!("{variable} carries no pseudo-counts")))?;
    let total: f64 = counts.iter().sum();
    BetaPosterior::new(counts[k], total - counts[k])
}

fn pct(p: f64) -> String {
    format!("{:.4}", 100.0 * p)
}

/// Renders rows as left-aligned columns separated by two spaces.
fn render_table(f: &mut fmt::Formatter<'_>, header: &[String], rows: &[Vec<String>]) -> fmt::Result {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].chars().count())
                .chain([header[c].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    writeln!(f, "{}", line(header))?;
    writeln!(f, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "))?;
    for r in rows {
        writeln!(f, "{}", line(r))?;
    }
    Ok(())
}

fn strings<const N: usize>(xs: [&str; N]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

impl fmt::Display for InfluenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "target: {}", self.target)?;
        writeln!(f, "evidence: {}", self.evidence)?;
        writeln!(f, "base probability (%): {}", pct(self.base_probability))?;
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    format!("{}={}", r.variable, r.states.join("|")),
                    r.probability.map_or_else(|| "-".into(), pct),
                    r.delta.map_or_else(|| "-".into(), pct),
                    r.error.clone().unwrap_or_default(),
                ]
            })
            .collect();
        render_table(f, &strings(["dropped", "without (%)", "delta (%)", "note"]), &rows)?;
        if let Some(m) = &self.most_influential {
            writeln!(f, "most influential: {m}")?;
        }
        Ok(())
    }
}

impl fmt::Display for WhatIfTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "target: {}", self.target)?;
        writeln!(f, "base: {}", self.base)?;
        writeln!(f, "base probability (%): {}", pct(self.base_probability))?;
        let mut rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.variable.clone(),
                    r.base_states.join("|"),
                    r.improved_state.clone(),
                    pct(r.probability),
                    pct(r.change),
                ]
            })
            .collect();
        if let Some(c) = &self.combined {
            rows.push(vec![
                "combined".into(),
                String::new(),
                c.improvements.iter().map(|(v, s)| format!("{v}={s}")).collect::<Vec<_>>().join(", "),
                pct(c.probability),
                pct(c.change),
            ]);
        }
        render_table(
            f,
            &strings(["variable", "base", "improved", "probability (%)", "change (%)"]),
            &rows,
        )
    }
}

impl fmt::Display for PrevalenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut header = vec![self.group.clone()];
        header.extend(self.outcomes.iter().map(|o| format!("{o} (%)")));
        let rows: Vec<Vec<String>> = self
            .group_states
            .iter()
            .zip(&self.cells)
            .map(|(g, row)| std::iter::once(g.clone()).chain(row.iter().map(|&p| pct(p))).collect())
            .collect();
        render_table(f, &header, &rows)
    }
}

impl fmt::Display for ProportionComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "P({} > {}) = {:.6}", self.first, self.second, self.probability)?;
        writeln!(f, "standard error: {:.6}", self.standard_error)?;
        writeln!(f, "samples: {} (seed {})", self.samples, self.seed)
    }
}
