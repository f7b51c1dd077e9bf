use crate::model::BayesianNetwork;

/// Values below this trigger a rescale; the scale is carried in log space.
const UNDERFLOW_GUARD: f64 = 1e-300;

/// Nonnegative table over the joint states of `scope`, mixed-radix with the
/// first scope variable most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
    log_scale: f64,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

impl Factor {
    pub fn new(scope: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        assert_eq!(scope.len(), cards.len());
        assert_eq!(values.len(), cards.iter().product::<usize>(), "factor size");
        debug_assert!(values.iter().all(|v| *v >= 0.0));
        Factor {
            scope,
            cards,
            values,
            log_scale: 0.0,
        }
    }

    pub fn scalar(value: f64) -> Self {
        Factor::new(Vec::new(), Vec::new(), vec![value])
    }

    /// The CPT of `node` as a factor over `[parents.., node]`.
    pub fn from_cpt(net: &BayesianNetwork, node: usize) -> Self {
        let mut scope = net.dag().parent_indices(node).to_vec();
        scope.push(node);
        let cards = scope.iter().map(|&v| net.variables()[v].cardinality()).collect();
        Factor::new(scope, cards, net.cpts()[node].values().to_vec())
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    /// Values relative to `exp(log_scale)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn contains(&self, var: usize) -> bool {
        self.scope.contains(&var)
    }

    /// Zeroes entries where `var` takes a state outside `allowed`.
    pub fn restrict(&mut self, var: usize, allowed: &[bool]) {
        let Some(pos) = self.scope.iter().position(|&v| v == var) else {
            return;
        };
        let stride = strides(&self.cards)[pos];
        let card = self.cards[pos];
        for (i, v) in self.values.iter_mut().enumerate() {
            if !allowed[(i / stride) % card] {
                *v = 0.0;
            }
        }
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let (ma, mb) = (self.max(), other.max());
        if ma > 0.0 && mb > 0.0 && ma * mb < UNDERFLOW_GUARD {
            return self.normalized_by_max().product(&other.normalized_by_max());
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.scope.iter().zip(&other.cards) {
            if !scope.contains(&v) {
                scope.push(v);
                cards.push(c);
            }
        }
        let sa = aligned_strides(&scope, &self.scope, &self.cards);
        let sb = aligned_strides(&scope, &other.scope, &other.cards);
        let n: usize = cards.iter().product();
        let mut values = Vec::with_capacity(n);
        let mut states = vec![0usize; scope.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..n {
            values.push(self.values[ia] * other.values[ib]);
            let mut j = scope.len();
            while j > 0 {
                j -= 1;
                states[j] += 1;
                ia += sa[j];
                ib += sb[j];
                if states[j] < cards[j] {
                    break;
                }
                ia -= sa[j] * cards[j];
                ib -= sb[j] * cards[j];
                states[j] = 0;
            }
        }
        let mut f = Factor {
            scope,
            cards,
            values,
            log_scale: self.log_scale + other.log_scale,
        };
        f.guard_underflow();
        f
    }

    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(pos) = self.scope.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        let target = aligned_strides(&self.scope, &scope, &cards);
        let mut values = vec![0.0; cards.iter().product()];
        let mut states = vec![0usize; self.scope.len()];
        let mut it = 0usize;
        for &v in &self.values {
            values[it] += v;
            let mut j = self.scope.len();
            while j > 0 {
                j -= 1;
                states[j] += 1;
                it += target[j];
                if states[j] < self.cards[j] {
                    break;
                }
                it -= target[j] * self.cards[j];
                states[j] = 0;
            }
        }
        let mut f = Factor {
            scope,
            cards,
            values,
            log_scale: self.log_scale,
        };
        f.guard_underflow();
        f
    }

    /// Same table with the scope reordered to `order` (a permutation).
    pub fn permuted(&self, order: &[usize]) -> Factor {
        assert_eq!(order.len(), self.scope.len());
        let cards: Vec<usize> = order
            .iter()
            .map(|v| {
                let p = self.scope.iter().position(|s| s == v).expect("permutation");
                self.cards[p]
            })
            .collect();
        let src = aligned_strides(order, &self.scope, &self.cards);
        let n = self.values.len();
        let mut values = Vec::with_capacity(n);
        let mut states = vec![0usize; order.len()];
        let mut is = 0usize;
        for _ in 0..n {
            values.push(self.values[is]);
            let mut j = order.len();
            while j > 0 {
                j -= 1;
                states[j] += 1;
                is += src[j];
                if states[j] < cards[j] {
                    break;
                }
                is -= src[j] * cards[j];
                states[j] = 0;
            }
        }
        Factor {
            scope: order.to_vec(),
            cards,
            values,
            log_scale: self.log_scale,
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    fn normalized_by_max(&self) -> Factor {
        let mut f = self.clone();
        let max = f.max();
        if max > 0.0 {
            f.values.iter_mut().for_each(|v| *v /= max);
            f.log_scale += max.ln();
        }
        f
    }

    fn guard_underflow(&mut self) {
        let max = self.max();
        if max > 0.0 && max < UNDERFLOW_GUARD {
            *self = self.normalized_by_max();
        }
    }
}

/// Strides of `sub` (with its own layout) laid along the variables of
/// `outer`; zero for variables `sub` does not contain.
fn aligned_strides(outer: &[usize], sub: &[usize], sub_cards: &[usize]) -> Vec<usize> {
    let s = strides(sub_cards);
    outer
        .iter()
        .map(|v| sub.iter().position(|x| x == v).map_or(0, |p| s[p]))
        .collect()
}
