use super::KeywordSets;
use crate::graph::NodeId;

/// Per-(node, keyword) activation, combined by maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationState {
    keywords: usize,
    mu: f64,
    values: Vec<f64>,
}

/// Outcome of one spreading step.
#[derive(Debug, Clone, PartialEq)]
pub struct Spread {
    pub retained: f64,
    /// Offered amount per neighbor, in the order given.
    pub offers: Vec<f64>,
}

/// Keyword nodes start with their prestige split evenly across their set.
pub fn init_activation(ks: &KeywordSets, prestige: &[f32], mu: f64) -> ActivationState {
    let w = ks.len();
    let mut values = vec![0.0; prestige.len() * w];
    for (i, set) in ks.sets().iter().enumerate() {
        let share = 1.0 / set.len() as f64;
        for &u in set {
            values[u as usize * w + i] = prestige[u as usize] as f64 * share;
        }
    }
    ActivationState {
        keywords: w,
        mu,
        values,
    }
}

/// Keeps `1 - mu` of `received` and splits `mu` of it over the neighbors in
/// inverse proportion to their edge weights. Without neighbors everything
/// is kept.
pub fn spread_activation(received: f64, weights: &[f32], mu: f64) -> Spread {
    if weights.is_empty() {
        return Spread {
            retained: received,
            offers: Vec::new(),
        };
    }
    let inv_total: f64 = weights.iter().map(|&w| 1.0 / w as f64).sum();
    let passed = mu * received;
    let offers: Vec<f64> = weights
        .iter()
        .map(|&w| passed * (1.0 / w as f64) / inv_total)
        .collect();
    Spread {
        retained: received - passed,
        offers,
    }
}

impl ActivationState {
    pub fn keywords(&self) -> usize {
        self.keywords
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn get(&self, u: NodeId, i: usize) -> f64 {
        self.values[u as usize * self.keywords + i]
    }

    /// Sum over keywords; the priority of `u` in the search queues.
    pub fn total(&self, u: NodeId) -> f64 {
        let base = u as usize * self.keywords;
        self.values[base..base + self.keywords].iter().sum()
    }

    /// Raises `a[u][i]` to `amount` if larger. Returns whether it changed.
    pub fn offer(&mut self, u: NodeId, i: usize, amount: f64) -> bool {
        let v = &mut self.values[u as usize * self.keywords + i];
        if amount > *v {
            *v = amount;
            true
        } else {
            false
        }
    }

    /// Spreads keyword `i` activation of `from` to `neighbors` (node, edge
    /// weight). The sender's own value is left as is.
    pub fn spread(&mut self, from: NodeId, i: usize, neighbors: &[(NodeId, f32)]) -> Spread {
        let weights: Vec<f32> = neighbors.iter().map(|&(_, w)| w).collect();
        let s = spread_activation(self.get(from, i), &weights, self.mu);
        for (&(v, _), &amount) in neighbors.iter().zip(&s.offers) {
            self.offer(v, i, amount);
        }
        s
    }
}
