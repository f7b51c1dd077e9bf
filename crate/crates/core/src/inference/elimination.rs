use std::collections::BTreeSet;

use super::factor::Factor;
use crate::model::BayesianNetwork;

/// Order in which non-query variables are summed out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EliminationOrder {
    /// Greedy min-fill, ties broken by variable id.
    #[default]
    MinFill,
    /// Children before parents.
    ReverseTopological,
}

/// Unnormalized joint `P(query, evidence)` as a factor over `query` (in the
/// given order), obtained by restricting every CPT to the evidence masks and
/// summing out everything else.
pub(crate) fn joint_table(
    net: &BayesianNetwork,
    masks: &[Option<Vec<bool>>],
    query: &[usize],
    order: EliminationOrder,
) -> Factor {
    let mut factors: Vec<Factor> = (0..net.len())
        .map(|i| {
            let mut f = Factor::from_cpt(net, i);
            for &v in f.scope().to_vec().iter() {
                if let Some(mask) = &masks[v] {
                    f.restrict(v, mask);
                }
            }
            f
        })
        .collect();

    let hidden: Vec<usize> = (0..net.len()).filter(|v| !query.contains(v)).collect();
    let sequence = match order {
        EliminationOrder::MinFill => min_fill_order(net, &factors, &hidden),
        EliminationOrder::ReverseTopological => {
            let topo = net.dag().topological_indices().expect("validated dag");
            topo.into_iter().rev().filter(|v| hidden.contains(v)).collect()
        }
    };

    for var in sequence {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.contains(var));
        factors = rest;
        let product = touching
            .iter()
            .skip(1)
            .fold(touching[0].clone(), |acc, f| acc.product(f));
        factors.push(product.sum_out(var));
    }

    let joint = factors
        .iter()
        .fold(Factor::scalar(1.0), |acc, f| acc.product(f));
    joint.permuted(query)
}

fn min_fill_order(net: &BayesianNetwork, factors: &[Factor], hidden: &[usize]) -> Vec<usize> {
    let n = net.len();
    let mut adj = vec![BTreeSet::new(); n];
    for f in factors {
        for &a in f.scope() {
            for &b in f.scope() {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    let mut remaining: BTreeSet<usize> = hidden.iter().copied().collect();
    let mut order = Vec::with_capacity(hidden.len());
    while !remaining.is_empty() {
        let best = *remaining
            .iter()
            .min_by(|&&a, &&b| {
                fill_in(&adj, a)
                    .cmp(&fill_in(&adj, b))
                    .then_with(|| net.variables()[a].id.cmp(&net.variables()[b].id))
            })
            .expect("non-empty");
        let neighbours: Vec<usize> = adj[best].iter().copied().collect();
        for &a in &neighbours {
            for &b in &neighbours {
                if a != b {
                    adj[a].insert(b);
                }
            }
            adj[a].remove(&best);
        }
        adj[best].clear();
        remaining.remove(&best);
        order.push(best);
    }
    order
}

fn fill_in(adj: &[BTreeSet<usize>], v: usize) -> usize {
    let nb: Vec<usize> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if !adj[a].contains(&b) {
                missing += 1;
            }
        }
    }
    missing
}
