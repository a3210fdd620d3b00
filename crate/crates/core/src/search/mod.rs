//! Ranked answer-tree search over a [`DataGraph`].

mod activation;
mod backward;
mod bidirectional;
mod tree;

pub use activation::{init_activation, spread_activation, ActivationState, Spread};
pub use backward::backward_search;
pub use bidirectional::bidirectional_search;

use std::collections::HashSet;
use std::ops::{Add, AddAssign};
use std::str::FromStr;
use std::time::Duration;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DataGraph, NodeId};
use crate::index::{normalize_term, KeywordIndex};
use crate::scoring::{AnswerTree, OutputHeap, ScoreConfig, ScoredAnswer};

/// One node set per query term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordSets {
    sets: Vec<Vec<NodeId>>,
}

impl KeywordSets {
    /// Sorts and deduplicates each set; every set must be nonempty.
    pub fn new(sets: Vec<Vec<NodeId>>) -> Result<Self> {
        let mut sets = sets;
        for (index, s) in sets.iter_mut().enumerate() {
            if s.is_empty() {
                return Err(Error::EmptyKeywordSet { index });
            }
            s.sort_unstable();
            s.dedup();
        }
        if sets.is_empty() {
            return Err(Error::EmptyKeywordSet { index: 0 });
        }
        Ok(Self { sets })
    }

    pub fn from_terms<S: AsRef<str>>(index: &KeywordIndex, terms: &[S]) -> Result<Self> {
        let sets = terms
            .iter()
            .map(|t| {
                let hits = index.lookup(t.as_ref());
                if hits.is_empty() {
                    Err(Error::NoAnswer {
                        term: normalize_term(t.as_ref()),
                    })
                } else {
                    Ok(hits.to_vec())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sets)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[Vec<NodeId>] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &[NodeId] {
        &self.sets[i]
    }

    pub fn contains(&self, i: usize, n: NodeId) -> bool {
        self.sets[i].binary_search(&n).is_ok()
    }

    /// All keyword nodes, sorted.
    pub fn union(&self) -> Vec<NodeId> {
        let mut all: Vec<NodeId> = self.sets.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    fn check_nodes(&self, g: &DataGraph) -> Result<()> {
        let n = g.node_count() as NodeId;
        match self.sets.iter().flatten().find(|&&v| v >= n) {
            Some(v) => Err(Error::InvalidGraph(format!("keyword node {v} not in graph"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    #[default]
    Backward,
    Bidirectional,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backward" => Ok(Self::Backward),
            "bidi" | "bidirectional" => Ok(Self::Bidirectional),
            _ => Err(Error::Config(format!("unknown search algorithm `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Answers to return.
    pub k: usize,
    pub score: ScoreConfig,
    /// Fraction of activation passed on to neighbors.
    pub mu: f64,
    pub steiner_filter: bool,
    /// Stop generating candidate trees after this many; `None` runs to exhaustion.
    pub candidate_budget: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            k: 10,
            score: ScoreConfig::default(),
            mu: 0.5,
            steiner_filter: false,
            candidate_budget: Some(2000),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        self.score.validate()?;
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::Config(format!("mu {} not in (0,1)", self.mu)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SearchStats {
    /// Distinct nodes ever inserted into a priority queue.
    pub nodes_touched: u64,
    /// Distinct nodes popped and expanded.
    pub nodes_explored: u64,
    pub elapsed: Duration,
    pub answers_emitted: u64,
    pub candidates: u64,
}

impl Add for SearchStats {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            nodes_touched: self.nodes_touched + o.nodes_touched,
            nodes_explored: self.nodes_explored + o.nodes_explored,
            elapsed: self.elapsed + o.elapsed,
            answers_emitted: self.answers_emitted + o.answers_emitted,
            candidates: self.candidates + o.candidates,
        }
    }
}

impl AddAssign for SearchStats {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub answers: Vec<ScoredAnswer>,
    pub stats: SearchStats,
}

pub fn search(algorithm: Algorithm, g: &DataGraph, ks: &KeywordSets, cfg: &SearchConfig) -> Result<SearchResult> {
    match algorithm {
        Algorithm::Backward => backward_search(g, ks, cfg),
        Algorithm::Bidirectional => bidirectional_search(g, ks, cfg),
    }
}

/// Drops every answer whose node set strictly contains another answer's.
pub fn steiner_minimality_filter(answers: Vec<ScoredAnswer>) -> Vec<ScoredAnswer> {
    let keep: Vec<bool> = answers
        .iter()
        .map(|a| !answers.iter().any(|b| strict_subset(&b.tree, &a.tree)))
        .collect();
    answers
        .into_iter()
        .zip(keep)
        .filter_map(|(a, k)| k.then_some(a))
        .collect()
}

fn strict_subset(small: &AnswerTree, big: &AnswerTree) -> bool {
    small.node_count() < big.node_count() && small.nodes().iter().all(|&n| big.contains(n))
}

/// A root with one child is redundant when every keyword is already matched
/// below it: the child's subtree is an answer on its own.
pub(crate) fn root_minimal(tree: &AnswerTree, ks: &KeywordSets) -> bool {
    if tree.edge_count() == 0 || tree.root_children() >= 2 {
        return true;
    }
    let covered_below = (0..ks.len()).all(|i| {
        tree.nodes()
            .iter()
            .any(|&n| n != tree.root() && ks.contains(i, n))
    });
    !covered_below
}

/// Candidate bookkeeping shared by both strategies.
pub(crate) struct Collector<'a> {
    cfg: &'a SearchConfig,
    prestige: &'a [f32],
    heap: OutputHeap,
    seen: HashSet<(NodeId, Vec<(NodeId, NodeId)>)>,
    emitted: Vec<ScoredAnswer>,
    candidates: usize,
}

impl<'a> Collector<'a> {
    pub(crate) fn new(cfg: &'a SearchConfig, prestige: &'a [f32]) -> Self {
        Self {
            cfg,
            prestige,
            heap: OutputHeap::new(),
            seen: HashSet::new(),
            emitted: Vec::new(),
            candidates: 0,
        }
    }

    /// Scores and buffers a freshly built tree unless it is a duplicate or
    /// has a redundant root.
    pub(crate) fn offer(&mut self, tree: AnswerTree, ks: &KeywordSets) {
        self.candidates += 1;
        if !root_minimal(&tree, ks) || !self.seen.insert(tree.canonical_key()) {
            return;
        }
        self.heap
            .push(ScoredAnswer::new(tree, self.prestige, &self.cfg.score));
    }

    pub(crate) fn budget_spent(&self) -> bool {
        self.cfg
            .candidate_budget
            .is_some_and(|b| self.candidates >= b)
    }

    pub(crate) fn done(&self) -> bool {
        self.emitted.len() >= self.cfg.k
    }

    /// Releases buffered answers that no future candidate can beat.
    pub(crate) fn emit(&mut self, upper_bound: f64) {
        while !self.done() {
            let Some(a) = self.heap.emit(upper_bound, 1).pop() else {
                break;
            };
            if self.cfg.steiner_filter
                && self.emitted.iter().any(|e| strict_subset(&e.tree, &a.tree))
            {
                continue;
            }
            self.emitted.push(a);
        }
    }

    pub(crate) fn finish(mut self) -> (Vec<ScoredAnswer>, usize) {
        self.emit(f64::NEG_INFINITY);
        let answers = if self.cfg.steiner_filter {
            steiner_minimality_filter(self.emitted)
        } else {
            self.emitted
        };
        (answers, self.candidates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::TreeEdge;

    fn scored(root: NodeId, edges: &[(NodeId, NodeId)], kw: Vec<NodeId>) -> ScoredAnswer {
        let tree = AnswerTree::new(
            root,
            edges
                .iter()
                .map(|&(parent, child)| TreeEdge {
                    parent,
                    child,
                    weight: 1.0,
                })
                .collect(),
            kw,
        )
        .unwrap();
        ScoredAnswer::new(tree, &[1.0; 8], &ScoreConfig::default())
    }

    #[test]
    fn keyword_sets_reject_empty() {
        assert!(matches!(
            KeywordSets::new(vec![vec![1], vec![]]),
            Err(Error::EmptyKeywordSet { index: 1 })
        ));
        let ks = KeywordSets::new(vec![vec![3, 1, 3], vec![2]]).unwrap();
        assert_eq!(ks.set(0), &[1, 3]);
        assert_eq!(ks.union(), vec![1, 2, 3]);
    }

    #[test]
    fn steiner_filter_drops_supersets() {
        let small = scored(2, &[], vec![2, 2]);
        let big = scored(1, &[(1, 2), (1, 3)], vec![2, 3]);
        let out = steiner_minimality_filter(vec![small.clone(), big]);
        assert_eq!(out, vec![small]);

        let a = scored(0, &[(0, 1)], vec![0, 1]);
        let b = scored(4, &[(4, 5)], vec![4, 5]);
        assert_eq!(steiner_minimality_filter(vec![a.clone(), b.clone()]).len(), 2);
    }

    #[test]
    fn root_minimality_rule() {
        let ks = KeywordSets::new(vec![vec![2], vec![3]]).unwrap();
        let chain = scored(0, &[(0, 1), (1, 2), (1, 3)], vec![2, 3]).tree;
        assert!(!root_minimal(&chain, &ks));
        let fork = scored(1, &[(1, 2), (1, 3)], vec![2, 3]).tree;
        assert!(root_minimal(&fork, &ks));
        // a keyword root with a single child is still an answer
        let ks = KeywordSets::new(vec![vec![0], vec![1]]).unwrap();
        let pair = scored(0, &[(0, 1)], vec![0, 1]).tree;
        assert!(root_minimal(&pair, &ks));
    }
}
