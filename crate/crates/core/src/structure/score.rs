use std::collections::HashMap;
use std::sync::RwLock;

use statrs::function::gamma::ln_gamma;

use super::StructureError;
use crate::io::Dataset;
use crate::learning::check_alpha;
use crate::model::Dag;

/// Parent-configuration tables up to this many cells are counted densely.
const DENSE_LIMIT: usize = 1 << 20;

/// Log marginal likelihood of one family under a Dirichlet prior with
/// pseudo-count `alpha` in every cell:
/// `sum_j [lnG(K a) - lnG(N_j + K a) + sum_k (lnG(n_jk + a) - lnG(a))]`.
pub fn family_score(data: &Dataset, child: &str, parents: &[&str], alpha: f64) -> Result<f64, StructureError> {
    check_alpha(alpha).map_err(|e| StructureError::InvalidFamily(e.to_string()))?;
    let col = |id: &str| {
        data.column_index(id)
            .ok_or_else(|| StructureError::InvalidFamily(format!("{id} is not a dataset variable")))
    };
    let c = col(child)?;
    let mut ps = Vec::with_capacity(parents.len());
    for p in parents {
        let i = col(p)?;
        if i == c {
            return Err(StructureError::InvalidFamily(format!("{child} listed as its own parent")));
        }
        if ps.contains(&i) {
            return Err(StructureError::InvalidFamily(format!("parent {p} repeated")));
        }
        ps.push(i);
    }
    Ok(FamilyScorer::new(data, alpha).score(c, &ps))
}

/// Column-major view of a dataset with a memo of family scores.
pub(crate) struct FamilyScorer {
    columns: Vec<Vec<u16>>,
    cards: Vec<usize>,
    alpha: f64,
    records: usize,
    cache: RwLock<HashMap<(usize, Vec<usize>), f64>>,
}

impl FamilyScorer {
    pub(crate) fn new(data: &Dataset, alpha: f64) -> Self {
        let w = data.width();
        let mut columns = vec![Vec::with_capacity(data.len()); w];
        for rec in data.records() {
            for (col, &s) in columns.iter_mut().zip(rec) {
                col.push(s);
            }
        }
        FamilyScorer {
            columns,
            cards: data.cardinalities(),
            alpha,
            records: data.len(),
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// Score of `child` given `parents` (dataset column indices). The score
    /// does not depend on parent order, so the memo key is sorted.
    pub(crate) fn score(&self, child: usize, parents: &[usize]) -> f64 {
        let mut key = parents.to_vec();
        key.sort_unstable();
        let key = (child, key);
        if let Some(&s) = self.cache.read().expect("score cache").get(&key) {
            return s;
        }
        let s = self.compute(child, &key.1);
        self.cache.write().expect("score cache").insert(key, s);
        s
    }

    pub(crate) fn total(&self, dag: &Dag) -> f64 {
        (0..dag.len()).map(|i| self.score(i, dag.parent_indices(i))).sum()
    }

    fn compute(&self, child: usize, parents: &[usize]) -> f64 {
        if self.records == 0 {
            return 0.0;
        }
        let k = self.cards[child];
        let configs = parents
            .iter()
            .try_fold(1usize, |acc, &p| acc.checked_mul(self.cards[p]));
        let config_of = |r: usize| {
            parents
                .iter()
                .fold(0usize, |acc, &p| acc * self.cards[p] + self.columns[p][r] as usize)
        };
        let child_col = &self.columns[child];
        let a = self.alpha;
        let ln_ga = ln_gamma(a);
        let ln_gka = ln_gamma(k as f64 * a);
        let row_term = |row: &[u64]| {
            let n: u64 = row.iter().sum();
            if n == 0 {
                return 0.0;
            }
            let cells: f64 = row
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| ln_gamma(c as f64 + a) - ln_ga)
                .sum();
            ln_gka - ln_gamma(n as f64 + k as f64 * a) + cells
        };
        match configs.and_then(|c| c.checked_mul(k)).filter(|&n| n <= DENSE_LIMIT) {
            Some(cells) => {
                let mut counts = vec![0u64; cells];
                for (r, &x) in child_col.iter().enumerate() {
                    counts[config_of(r) * k + x as usize] += 1;
                }
                counts.chunks(k).map(row_term).sum()
            }
            None => {
                let mut counts: HashMap<usize, Vec<u64>> = HashMap::new();
                for (r, &x) in child_col.iter().enumerate() {
                    counts.entry(config_of(r)).or_insert_with(|| vec![0; k])[x as usize] += 1;
                }
                let mut keys: Vec<&usize> = counts.keys().collect();
                keys.sort_unstable();
                keys.into_iter().map(|j| row_term(&counts[j])).sum()
            }
        }
    }
}
