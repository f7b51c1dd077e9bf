//! Multinomial-Dirichlet parameter learning.
//!
//! Every CPT cell gets the same prior pseudo-count `alpha` (1 by default, the
//! uniform prior). Point estimates are posterior means
//! `(n_k + alpha) / (N + K alpha)`; the pseudo-counts are kept alongside so
//! the full posterior stays available for sampling and Beta comparisons.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardUniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::Dataset;
use crate::model::{BayesianNetwork, Cpt, Dag, ModelError, VariableSpec};

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_FOLDS: usize = 5;

const TABULATE_CHUNK: usize = 16_384;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearningError {
    #[error("dataset does not match: {0}")]
    Mismatch(String),
    #[error("prior pseudo-count must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("{records} records cannot be split into {folds} folds")]
    TooFewRecords { records: usize, folds: usize },
    #[error("need at least 2 folds, got {0}")]
    InvalidFolds(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl LearningError {
    pub fn name(&self) -> &'static str {
        match self {
            LearningError::Mismatch(_) => "MismatchError",
            LearningError::InvalidAlpha(_) => "InvalidAlpha",
            LearningError::TooFewRecords { .. } => "TooFewRecords",
            LearningError::InvalidFolds(_) => "InvalidFolds",
            LearningError::Model(e) => e.name(),
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), LearningError> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(LearningError::InvalidAlpha(alpha))
    }
}

/// Raw counts of one variable: one row per parent configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub variable: String,
    pub parent_order: Vec<String>,
    pub cardinality: usize,
    counts: Vec<u64>,
}

impl CountTable {
    pub fn row(&self, r: usize) -> &[u64] {
        &self.counts[r * self.cardinality..(r + 1) * self.cardinality]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks(self.cardinality)
    }

    pub fn row_count(&self) -> usize {
        self.counts.len() / self.cardinality
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Per-variable frequency tables for a fixed DAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SufficientStats {
    variables: Vec<VariableSpec>,
    dag: Dag,
    tables: Vec<CountTable>,
    records: usize,
}

impl SufficientStats {
    fn zeros(variables: Vec<VariableSpec>, dag: Dag) -> Self {
        let tables = variables
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let rows: usize = dag
                    .parent_indices(i)
                    .iter()
                    .map(|&p| variables[p].cardinality())
                    .product();
                CountTable {
                    variable: v.id.clone(),
                    parent_order: dag.parents(&v.id).unwrap().iter().map(|s| s.to_string()).collect(),
                    cardinality: v.cardinality(),
                    counts: vec![0; rows * v.cardinality()],
                }
            })
            .collect();
        SufficientStats {
            variables,
            dag,
            tables,
            records: 0,
        }
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn tables(&self) -> &[CountTable] {
        &self.tables
    }

    pub fn table(&self, id: &str) -> Option<&CountTable> {
        self.dag.index_of(id).map(|i| &self.tables[i])
    }

    pub fn records(&self) -> usize {
        self.records
    }

    /// Elementwise addition of counts over the same structure.
    pub fn merge(&mut self, other: &SufficientStats) {
        assert_eq!(self.dag, other.dag, "merging stats of different structures");
        for (a, b) in self.tables.iter_mut().zip(&other.tables) {
            a.counts.iter_mut().zip(&b.counts).for_each(|(x, y)| *x += y);
        }
        self.records += other.records;
    }
}

/// Maps each network/DAG position to its dataset column, checking that the
/// variable sets (and their state lists) agree.
fn column_map(data: &Dataset, ids: &[String], specs: Option<&[VariableSpec]>) -> Result<Vec<usize>, LearningError> {
    if data.width() != ids.len() {
        return Err(LearningError::Mismatch(format!(
            "dataset has {} columns, model has {} variables",
            data.width(),
            ids.len()
        )));
    }
    ids.iter()
        .enumerate()
        .map(|(i, id)| {
            let c = data
                .column_index(id)
                .ok_or_else(|| LearningError::Mismatch(format!("dataset lacks column {id}")))?;
            if let Some(specs) = specs {
                if data.variables()[c].states != specs[i].states {
                    return Err(LearningError::Mismatch(format!("state list of {id} differs")));
                }
            }
            Ok(c)
        })
        .collect()
}

/// Counts per (variable, parent configuration, child state).
pub fn tabulate_counts(data: &Dataset, dag: &Dag) -> Result<SufficientStats, LearningError> {
    let cols = column_map(data, dag.nodes(), None)?;
    let variables: Vec<VariableSpec> = cols.iter().map(|&c| data.variables()[c].clone()).collect();
    let empty = SufficientStats::zeros(variables, dag.clone());
    let n = data.len();
    let chunks: Vec<(usize, usize)> = (0..n)
        .step_by(TABULATE_CHUNK)
        .map(|s| (s, (s + TABULATE_CHUNK).min(n)))
        .collect();
    let stats = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut part = empty.clone();
            let mut states = vec![0usize; cols.len()];
            for r in start..end {
                let rec = data.record(r);
                for (i, &c) in cols.iter().enumerate() {
                    states[i] = rec[c] as usize;
                }
                for (i, table) in part.tables.iter_mut().enumerate() {
                    let row = dag
                        .parent_indices(i)
                        .iter()
                        .fold(0, |acc, &p| acc * part.variables[p].cardinality() + states[p]);
                    table.counts[row * table.cardinality + states[i]] += 1;
                }
            }
            part.records = end - start;
            part
        })
        .reduce(
            || empty.clone(),
            |mut a, b| {
                a.merge(&b);
                a
            },
        );
    Ok(stats)
}

/// Posterior over all CPTs: a network whose every CPT carries its Dirichlet
/// pseudo-counts, with posterior-mean probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorCpts {
    alpha: Option<f64>,
    network: BayesianNetwork,
}

impl PosteriorCpts {
    /// Wraps a network whose CPTs all store counts.
    pub fn from_network(network: BayesianNetwork) -> Result<Self, LearningError> {
        if let Some(c) = network.cpts().iter().find(|c| !c.has_counts()) {
            return Err(LearningError::Mismatch(format!(
                "CPT {} has no pseudo-counts",
                c.variable()
            )));
        }
        Ok(PosteriorCpts { alpha: None, network })
    }

    /// The prior pseudo-count, when known.
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn network(&self) -> &BayesianNetwork {
        &self.network
    }

    pub fn into_network(self) -> BayesianNetwork {
        self.network
    }

    /// Pseudo-count row of `variable` for parent configuration `row`.
    pub fn pseudo_counts(&self, variable: &str, row: usize) -> Option<&[f64]> {
        let cpt = self.network.cpt(variable)?;
        if row >= cpt.row_count() {
            return None;
        }
        cpt.count_row(row)
    }
}

/// Adds `alpha` to every count and normalizes each row.
pub fn fit_parameters(stats: &SufficientStats, alpha: f64) -> Result<PosteriorCpts, LearningError> {
    check_alpha(alpha)?;
    let cpts = stats
        .tables
        .iter()
        .map(|t| {
            let counts = t
                .rows()
                .map(|row| row.iter().map(|&n| n as f64 + alpha).collect())
                .collect();
            Cpt::from_counts(&t.variable, t.parent_order.clone(), counts)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut notes = BTreeMap::new();
    notes.insert("prior_alpha".to_string(), alpha.to_string());
    notes.insert("training_records".to_string(), stats.records.to_string());
    let network = BayesianNetwork::new(stats.variables.clone(), &stats.dag, cpts, notes)?;
    Ok(PosteriorCpts {
        alpha: Some(alpha),
        network,
    })
}

/// Fits a network straight from data.
pub fn fit_network(data: &Dataset, dag: &Dag, alpha: f64) -> Result<BayesianNetwork, LearningError> {
    Ok(fit_parameters(&tabulate_counts(data, dag)?, alpha)?.into_network())
}

/// Log of a Gamma(shape, 1) draw. Shapes below one use
/// `Gamma(a) = Gamma(a + 1) * U^(1/a)` in log space so tiny shapes do not
/// underflow to zero.
fn log_gamma_draw<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    if shape >= 1.0 {
        Gamma::new(shape, 1.0).expect("positive shape").sample(rng).ln()
    } else {
        let g = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
        let u: f64 = StandardUniform.sample(rng);
        // u is in [0,1); 1-u is in (0,1]
        g.ln() + (1.0 - u).ln() / shape
    }
}

/// One Dirichlet draw.
pub fn sample_dirichlet<R: Rng + ?Sized>(rng: &mut R, concentration: &[f64]) -> Vec<f64> {
    let logs: Vec<f64> = concentration.iter().map(|&a| log_gamma_draw(rng, a)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// A network with every CPT row drawn from its Dirichlet posterior.
pub fn sample_parameters(post: &PosteriorCpts, seed: u64) -> BayesianNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = &post.network;
    let cpts = net
        .cpts()
        .iter()
        .map(|c| {
            let rows = c
                .count_rows()
                .expect("posterior CPTs carry counts")
                .map(|row| sample_dirichlet(&mut rng, row))
                .collect();
            Cpt::new(c.variable(), c.parent_order().to_vec(), rows).expect("normalized draw")
        })
        .collect();
    let mut notes = net.notes().clone();
    notes.insert("posterior_draw_seed".into(), seed.to_string());
    BayesianNetwork::new(net.variables().to_vec(), net.dag(), cpts, notes).expect("same structure")
}

/// Cumulative CPT rows for fast categorical draws.
struct Sampler {
    order: Vec<usize>,
    cumulative: Vec<Vec<f64>>,
}

impl Sampler {
    fn new(net: &BayesianNetwork) -> Self {
        let cumulative = net
            .cpts()
            .iter()
            .map(|c| {
                c.rows()
                    .flat_map(|row| {
                        let mut acc = 0.0;
                        row.iter()
                            .map(move |p| {
                                acc += p;
                                acc
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect()
            })
            .collect();
        Sampler {
            order: net.dag().topological_indices().expect("validated dag"),
            cumulative,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, net: &BayesianNetwork, rng: &mut R, states: &mut [usize]) {
        for &i in &self.order {
            let k = net.variables()[i].cardinality();
            let r = net.cpt_row_index(i, states);
            let cum = &self.cumulative[i][r * k..(r + 1) * k];
            let row = net.cpts()[i].row(r);
            let u: f64 = rng.random();
            // rounding can leave cum[k-1] a hair below 1; fall back to the
            // last state with positive mass
            states[i] = cum
                .iter()
                .position(|&c| u < c)
                .unwrap_or_else(|| row.iter().rposition(|&p| p > 0.0).unwrap_or(k - 1));
        }
    }
}

/// `n` records drawn ancestrally, columns in network variable order.
pub fn forward_sample(net: &BayesianNetwork, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = Sampler::new(net);
    let mut data = Dataset::new(net.variables().to_vec());
    let mut states = vec![0usize; net.len()];
    let mut record = vec![0u16; net.len()];
    for _ in 0..n {
        sampler.draw(net, &mut rng, &mut states);
        for (dst, &s) in record.iter_mut().zip(&states) {
            *dst = s as u16;
        }
        data.push(&record);
    }
    data
}

/// Sum of per-record log joint probabilities. Records with probability zero
/// make the total `Impossible` rather than being clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogLikelihood {
    Finite { value: f64 },
    /// Negative infinity; `record` is the first zero-probability record.
    Impossible { record: usize },
}

impl LogLikelihood {
    pub fn value(&self) -> f64 {
        match self {
            LogLikelihood::Finite { value } => *value,
            LogLikelihood::Impossible { .. } => f64::NEG_INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, LogLikelihood::Finite { .. })
    }

    /// Log-likelihood of the concatenation of two datasets (`self` first,
    /// `other_offset` = length of the first).
    pub fn concat(self, other: LogLikelihood, other_offset: usize) -> LogLikelihood {
        match (self, other) {
            (LogLikelihood::Impossible { record }, _) => LogLikelihood::Impossible { record },
            (_, LogLikelihood::Impossible { record }) => LogLikelihood::Impossible {
                record: record + other_offset,
            },
            (LogLikelihood::Finite { value: a }, LogLikelihood::Finite { value: b }) => {
                LogLikelihood::Finite { value: a + b }
            }
        }
    }
}

pub fn holdout_log_likelihood(net: &BayesianNetwork, data: &Dataset) -> Result<LogLikelihood, LearningError> {
    let ids: Vec<String> = net.variables().iter().map(|v| v.id.clone()).collect();
    let cols = column_map(data, &ids, Some(net.variables()))?;
    let mut states = vec![0usize; cols.len()];
    let mut total = 0.0;
    for (r, rec) in data.records().enumerate() {
        for (i, &c) in cols.iter().enumerate() {
            states[i] = rec[c] as usize;
        }
        let p = net.joint_probability_indexed(&states);
        if p <= 0.0 {
            return Ok(LogLikelihood::Impossible { record: r });
        }
        total += p.ln();
    }
    Ok(LogLikelihood::Finite { value: total })
}

/// Scores of one cross-validation fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold: usize,
    pub train_records: usize,
    pub holdout_records: usize,
    pub train_log_likelihood: LogLikelihood,
    pub holdout_log_likelihood: LogLikelihood,
}

impl FoldScore {
    pub fn holdout_per_record(&self) -> f64 {
        self.holdout_log_likelihood.value() / self.holdout_records as f64
    }

    pub fn train_per_record(&self) -> f64 {
        self.train_log_likelihood.value() / self.train_records as f64
    }
}

/// Seeded shuffle, contiguous fold split, fit on the other folds, score the
/// held-out fold.
pub fn cross_validate(
    data: &Dataset,
    dag: &Dag,
    folds: usize,
    alpha: f64,
    seed: u64,
) -> Result<Vec<FoldScore>, LearningError> {
    if folds < 2 {
        return Err(LearningError::InvalidFolds(folds));
    }
    check_alpha(alpha)?;
    let n = data.len();
    if n < folds {
        return Err(LearningError::TooFewRecords { records: n, folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    (0..folds)
        .map(|k| {
            let (lo, hi) = (k * n / folds, (k + 1) * n / folds);
            let holdout = data.select(&order[lo..hi]);
            let train_idx: Vec<usize> = order[..lo].iter().chain(&order[hi..]).copied().collect();
            let train = data.select(&train_idx);
            let net = fit_network(&train, dag, alpha)?;
            Ok(FoldScore {
                fold: k,
                train_records: train.len(),
                holdout_records: holdout.len(),
                train_log_likelihood: holdout_log_likelihood(&net, &train)?,
                holdout_log_likelihood: holdout_log_likelihood(&net, &holdout)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::cvd_fixture;

    fn binary(id: &str) -> VariableSpec {
        VariableSpec::new(id, id, ["t", "f"]).unwrap()
    }

    fn chain_data(rows: &[[&str; 2]]) -> (Dataset, Dag) {
        let mut d = Dataset::new(vec![binary("A"), binary("B")]);
        for r in rows {
            d.push_labels(r).unwrap();
        }
        (d, Dag::new(["A", "B"], [("B", vec!["A"])]).unwrap())
    }

    #[test]
    fn empty_dataset_counts_zero() {
        let (d, dag) = chain_data(&[]);
        let s = tabulate_counts(&d, &dag).unwrap();
        assert!(s.tables().iter().all(|t| t.total() == 0));
    }

    #[test]
    fn root_tally() {
        let mut d = Dataset::new(vec![binary("A")]);
        for s in ["t", "t", "f"] {
            d.push_labels(&[s]).unwrap();
        }
        let s = tabulate_counts(&d, &Dag::empty(["A"]).unwrap()).unwrap();
        assert_eq!(s.table("A").unwrap().row(0), &[2, 1]);
    }

    #[test]
    fn chain_tally() {
        let (d, dag) = chain_data(&[["t", "t"], ["t", "f"], ["f", "t"]]);
        let s = tabulate_counts(&d, &dag).unwrap();
        let b = s.table("B").unwrap();
        assert_eq!(b.row(0), &[1, 1]);
        assert_eq!(b.row(1), &[1, 0]);
        assert_eq!(b.total(), 3);
    }

    #[test]
    fn mismatch_is_reported() {
        let (d, _) = chain_data(&[]);
        let dag = Dag::empty(["A", "C"]).unwrap();
        assert_eq!(tabulate_counts(&d, &dag).unwrap_err().name(), "MismatchError");
    }

    #[test]
    fn posterior_mean_rows() {
        let mut d = Dataset::new(vec![binary("A")]);
        for s in ["t", "t", "f", "f", "f"] {
            d.push_labels(&[s]).unwrap();
        }
        let post = fit_parameters(&tabulate_counts(&d, &Dag::empty(["A"]).unwrap()).unwrap(), 1.0).unwrap();
        let row = post.network().cpt("A").unwrap().row(0);
        assert!((row[0] - 3.0 / 7.0).abs() < 1e-15);
        assert!((row[1] - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(post.pseudo_counts("A", 0).unwrap(), &[3.0, 4.0]);
    }

    #[test]
    fn unobserved_configuration_gets_prior_mean() {
        let three = VariableSpec::new("B", "B", ["x", "y", "z"]).unwrap();
        let mut d = Dataset::new(vec![binary("A"), three]);
        d.push_labels(&["t", "x"]).unwrap();
        let dag = Dag::new(["A", "B"], [("B", vec!["A"])]).unwrap();
        let net = fit_network(&d, &dag, 1.0).unwrap();
        for p in net.cpt("B").unwrap().row(1) {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_alpha() {
        let (d, dag) = chain_data(&[]);
        let s = tabulate_counts(&d, &dag).unwrap();
        for a in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert_eq!(fit_parameters(&s, a).unwrap_err().name(), "InvalidAlpha");
        }
    }

    #[test]
    fn posterior_draws_are_seeded() {
        let (d, dag) = chain_data(&[["t", "t"], ["f", "t"]]);
        let post = fit_parameters(&tabulate_counts(&d, &dag).unwrap(), 1.0).unwrap();
        assert_eq!(sample_parameters(&post, 9), sample_parameters(&post, 9));
        assert_ne!(sample_parameters(&post, 9), sample_parameters(&post, 10));
    }

    #[test]
    fn huge_concentration_pins_the_draw() {
        let cpt = Cpt::from_counts("A", vec![], vec![vec![1e9, 1e9]]).unwrap();
        let dag = Dag::empty(["A"]).unwrap();
        let net = BayesianNetwork::new(vec![binary("A")], &dag, vec![cpt], BTreeMap::new()).unwrap();
        let post = PosteriorCpts::from_network(net).unwrap();
        let row = sample_parameters(&post, 1).cpt("A").unwrap().row(0).to_vec();
        assert!((row[0] - 0.5).abs() < 1e-3 && (row[1] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn tiny_concentrations_still_normalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let row = sample_dirichlet(&mut rng, &[1e-3, 1e-3, 1e-3]);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_mean_by_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let mut acc = [0.0; 2];
        for _ in 0..n {
            let r = sample_dirichlet(&mut rng, &[3.0, 4.0]);
            acc[0] += r[0];
            acc[1] += r[1];
        }
        assert!((acc[0] / n as f64 - 3.0 / 7.0).abs() < 0.01);
        assert!((acc[1] / n as f64 - 4.0 / 7.0).abs() < 0.01);
    }

    #[test]
    fn forward_sample_basics() {
        let net = cvd_fixture();
        assert!(forward_sample(&net, 0, 1).is_empty());
        assert_eq!(forward_sample(&net, 50, 1), forward_sample(&net, 50, 1));
    }

    #[test]
    fn deterministic_tables_give_identical_rows() {
        let dag = Dag::new(["A", "B"], [("B", vec!["A"])]).unwrap();
        let net = BayesianNetwork::new(
            vec![binary("A"), binary("B")],
            &dag,
            vec![
                Cpt::new("A", vec![], vec![vec![0.0, 1.0]]).unwrap(),
                Cpt::new("B", vec!["A".into()], vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap(),
            ],
            BTreeMap::new(),
        )
        .unwrap();
        let d = forward_sample(&net, 1000, 3);
        assert!(d.records().all(|r| r == [1, 0]));
    }

    #[test]
    fn root_frequency_converges() {
        let dag = Dag::new(["A", "B"], [("B", vec!["A"])]).unwrap();
        let net = BayesianNetwork::new(
            vec![binary("A"), binary("B")],
            &dag,
            vec![
                Cpt::new("A", vec![], vec![vec![0.6, 0.4]]).unwrap(),
                Cpt::new("B", vec!["A".into()], vec![vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap(),
            ],
            BTreeMap::new(),
        )
        .unwrap();
        let d = forward_sample(&net, 100_000, 17);
        let hits = d.records().filter(|r| r[0] == 0).count();
        assert!((hits as f64 / 1e5 - 0.6).abs() < 0.005);
    }

    #[test]
    fn log_likelihood_cases() {
        let (mut d, dag) = chain_data(&[]);
        let net = BayesianNetwork::new(
            vec![binary("A"), binary("B")],
            &dag,
            vec![
                Cpt::new("A", vec![], vec![vec![0.6, 0.4]]).unwrap(),
                Cpt::new("B", vec!["A".into()], vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap(),
            ],
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(holdout_log_likelihood(&net, &d).unwrap(), LogLikelihood::Finite { value: 0.0 });
        d.push_labels(&["t", "t"]).unwrap();
        let ll = holdout_log_likelihood(&net, &d).unwrap().value();
        assert!((ll - 0.3f64.ln()).abs() < 1e-12);
        assert!((ll + 1.20397).abs() < 1e-5);
        d.push_labels(&["f", "f"]).unwrap();
        assert_eq!(
            holdout_log_likelihood(&net, &d).unwrap(),
            LogLikelihood::Impossible { record: 1 }
        );
    }

    #[test]
    fn cross_validation_guards() {
        let (d, dag) = chain_data(&[["t", "t"]]);
        assert_eq!(cross_validate(&d, &dag, 1, 1.0, 0).unwrap_err().name(), "InvalidFolds");
        assert_eq!(cross_validate(&d, &dag, 2, 1.0, 0).unwrap_err().name(), "TooFewRecords");
    }

    #[test]
    fn duplicated_record_folds_agree() {
        let (d, dag) = chain_data(&[["t", "f"], ["t", "f"], ["t", "f"], ["t", "f"]]);
        let folds = cross_validate(&d, &dag, 2, 1.0, 5).unwrap();
        assert_eq!(folds[0].holdout_log_likelihood, folds[1].holdout_log_likelihood);
        assert_eq!(folds, cross_validate(&d, &dag, 2, 1.0, 5).unwrap());
    }
}
