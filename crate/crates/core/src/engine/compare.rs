use serde::Serialize;

use crate::scoring::{is_acceptable, AnswerTree, ScoredAnswer};

/// Agreement of one query's answers with the baseline's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct QueryComparison {
    /// Answers equal to some baseline answer (same root, same edges).
    pub exact_overlap: usize,
    /// Answers no larger than the largest baseline answer.
    pub acceptable_count: usize,
    pub system_answers: usize,
    pub baseline_answers: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ComparisonReport {
    pub queries: Vec<(String, QueryComparison)>,
}

impl ComparisonReport {
    pub fn push(&mut self, query: impl Into<String>, c: QueryComparison) {
        self.queries.push((query.into(), c));
    }

    pub fn mean_exact_overlap(&self) -> f64 {
        self.mean(|c| c.exact_overlap)
    }

    pub fn mean_acceptable(&self) -> f64 {
        self.mean(|c| c.acceptable_count)
    }

    fn mean(&self, f: impl Fn(&QueryComparison) -> usize) -> f64 {
        if self.queries.is_empty() {
            return 0.0;
        }
        self.queries.iter().map(|(_, c)| f(c)).sum::<usize>() as f64 / self.queries.len() as f64
    }
}

/// Compares the top 10 of both lists.
pub fn compare_precision(system: &[ScoredAnswer], baseline: &[ScoredAnswer]) -> QueryComparison {
    let system = &system[..system.len().min(10)];
    let baseline: Vec<AnswerTree> = baseline.iter().take(10).map(|a| a.tree.clone()).collect();
    QueryComparison {
        exact_overlap: system
            .iter()
            .filter(|a| baseline.iter().any(|b| b.same_tree(&a.tree)))
            .count(),
        acceptable_count: system.iter().filter(|a| is_acceptable(&a.tree, &baseline)).count(),
        system_answers: system.len(),
        baseline_answers: baseline.len(),
    }
}
