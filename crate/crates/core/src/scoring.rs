//! Answer trees, their scores, and the output heap that orders emission.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeEdge {
    pub parent: NodeId,
    pub child: NodeId,
    pub weight: f64,
}

/// Rooted tree with edges directed away from the root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnswerTree {
    root: NodeId,
    /// Sorted by `(parent, child)`.
    edges: Vec<TreeEdge>,
    /// Matched node for each keyword set, by keyword position.
    keyword_nodes: Vec<NodeId>,
    /// All tree nodes, sorted.
    nodes: Vec<NodeId>,
}

impl AnswerTree {
    pub fn single(root: NodeId, keyword_count: usize) -> Self {
        Self {
            root,
            edges: Vec::new(),
            keyword_nodes: vec![root; keyword_count],
            nodes: vec![root],
        }
    }

    pub fn new(root: NodeId, mut edges: Vec<TreeEdge>, keyword_nodes: Vec<NodeId>) -> Result<Self> {
        edges.sort_by_key(|e| (e.parent, e.child));
        let mut parent_of: BTreeMap<NodeId, NodeId> = BTreeMap::new();
        for e in &edges {
            if e.child == root || parent_of.insert(e.child, e.parent).is_some() {
                return Err(Error::InvalidGraph(format!(
                    "node {} has more than one parent",
                    e.child
                )));
            }
            if !(e.weight >= 0.0) {
                return Err(Error::InvalidGraph("negative tree edge weight".into()));
            }
        }
        // every parent must chain back to the root without cycles
        for &start in parent_of.keys() {
            let mut cur = start;
            let mut steps = 0;
            while cur != root {
                cur = *parent_of.get(&cur).ok_or_else(|| {
                    Error::InvalidGraph(format!("node {start} is not connected to the root"))
                })?;
                steps += 1;
                if steps > edges.len() {
                    return Err(Error::InvalidGraph("cycle in answer tree".into()));
                }
            }
        }
        let mut nodes: Vec<NodeId> = parent_of.keys().copied().collect();
        nodes.push(root);
        nodes.sort_unstable();
        if let Some(k) = keyword_nodes.iter().find(|k| nodes.binary_search(k).is_err()) {
            return Err(Error::InvalidGraph(format!("keyword node {k} not in tree")));
        }
        Ok(Self {
            root,
            edges,
            keyword_nodes,
            nodes,
        })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn keyword_nodes(&self) -> &[NodeId] {
        &self.keyword_nodes
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.nodes.binary_search(&n).is_ok()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn root_children(&self) -> usize {
        self.edges.iter().filter(|e| e.parent == self.root).count()
    }

    /// Non-root nodes without children. Empty for a single-node tree.
    pub fn leaves(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .copied()
            .filter(|&n| n != self.root && !self.edges.iter().any(|e| e.parent == n))
            .collect()
    }

    /// Root plus sorted `(parent, child)` pairs; equal keys mean equal trees.
    pub fn canonical_key(&self) -> (NodeId, Vec<(NodeId, NodeId)>) {
        (
            self.root,
            self.edges.iter().map(|e| (e.parent, e.child)).collect(),
        )
    }

    pub fn same_tree(&self, other: &AnswerTree) -> bool {
        self.canonical_key() == other.canonical_key()
    }

    /// Renames every node through `f`.
    pub fn relabel(&self, f: impl Fn(NodeId) -> NodeId) -> AnswerTree {
        let edges = self
            .edges
            .iter()
            .map(|e| TreeEdge {
                parent: f(e.parent),
                child: f(e.child),
                weight: e.weight,
            })
            .collect();
        AnswerTree::new(
            f(self.root),
            edges,
            self.keyword_nodes.iter().map(|&k| f(k)).collect(),
        )
        .expect("relabeling with an injective map keeps a tree")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Combine {
    /// `E * N^lambda`
    Multiplicative,
    /// `lambda * N + (1 - lambda) * E`
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeScoreVariant {
    /// `1 / (1 + 1 / sum(w))`
    AsWritten,
    /// `1 / (1 + sum(w))`
    ReciprocalSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreConfig {
    pub lambda: f64,
    pub combine: Combine,
    pub edge_score: EdgeScoreVariant,
    /// Margin, relative to the best score, within which an answer counts as good.
    pub epsilon: f64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            lambda: 0.2,
            combine: Combine::Additive,
            edge_score: EdgeScoreVariant::ReciprocalSum,
            epsilon: 0.05,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("lambda {} not in [0,1]", self.lambda)));
        }
        Ok(())
    }
}

/// Prestige of the root plus prestige of every leaf.
pub fn node_score(tree: &AnswerTree, prestige: &[f32]) -> f64 {
    let root = prestige[tree.root as usize] as f64;
    root + tree
        .leaves()
        .iter()
        .map(|&l| prestige[l as usize] as f64)
        .sum::<f64>()
}

pub fn edge_score(tree: &AnswerTree, cfg: &ScoreConfig) -> f64 {
    if tree.edges.is_empty() {
        return 1.0;
    }
    edge_score_for_weight(tree.total_weight(), cfg.edge_score)
}

pub fn edge_score_for_weight(total: f64, variant: EdgeScoreVariant) -> f64 {
    match variant {
        EdgeScoreVariant::AsWritten => 1.0 / (1.0 + 1.0 / total),
        EdgeScoreVariant::ReciprocalSum => 1.0 / (1.0 + total),
    }
}

pub fn tree_score(n: f64, e: f64, cfg: &ScoreConfig) -> f64 {
    match cfg.combine {
        Combine::Multiplicative => e * n.powf(cfg.lambda),
        Combine::Additive => cfg.lambda * n + (1.0 - cfg.lambda) * e,
    }
}

/// Distance of `score` from the best score; zero for the best answer.
pub fn answer_quality(score: f64, best: f64) -> f64 {
    best - score
}

pub fn is_good_answer(score: f64, best: f64, cfg: &ScoreConfig) -> bool {
    answer_quality(score, best) <= cfg.epsilon * best.abs()
}

/// No more nodes and no more edges than the largest baseline answer.
pub fn is_acceptable(tree: &AnswerTree, baseline: &[AnswerTree]) -> bool {
    let (Some(max_nodes), Some(max_edges)) = (
        baseline.iter().map(AnswerTree::node_count).max(),
        baseline.iter().map(AnswerTree::edge_count).max(),
    ) else {
        return false;
    };
    tree.node_count() <= max_nodes && tree.edge_count() <= max_edges
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredAnswer {
    pub tree: AnswerTree,
    pub node_score: f64,
    pub edge_score: f64,
    pub score: f64,
}

impl ScoredAnswer {
    pub fn new(tree: AnswerTree, prestige: &[f32], cfg: &ScoreConfig) -> Self {
        let n = node_score(&tree, prestige);
        let e = edge_score(&tree, cfg);
        Self {
            score: tree_score(n, e, cfg),
            node_score: n,
            edge_score: e,
            tree,
        }
    }

    pub fn relabel(&self, f: impl Fn(NodeId) -> NodeId) -> Self {
        Self {
            tree: self.tree.relabel(f),
            ..self.clone()
        }
    }
}

/// Total ranking order: higher score, then fewer nodes, then smaller root,
/// then lexicographically smaller edge list. `Less` means ranked first.
pub fn rank_order(a: &ScoredAnswer, b: &ScoredAnswer) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.tree.node_count().cmp(&b.tree.node_count()))
        .then(a.tree.root.cmp(&b.tree.root))
        .then_with(|| a.tree.canonical_key().1.cmp(&b.tree.canonical_key().1))
}

pub fn sort_ranked(answers: &mut [ScoredAnswer]) {
    answers.sort_by(rank_order);
}

struct Ranked(ScoredAnswer);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        rank_order(&self.0, &other.0) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap: best-ranked compares greatest
        rank_order(&other.0, &self.0)
    }
}

/// Buffers generated answers and releases them once no future answer can beat them.
#[derive(Default)]
pub struct OutputHeap {
    heap: BinaryHeap<Ranked>,
    last_emitted: Option<f64>,
}

impl OutputHeap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, answer: ScoredAnswer) {
        self.heap.push(Ranked(answer));
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn peek_score(&self) -> Option<f64> {
        self.heap.peek().map(|r| r.0.score)
    }

    /// Pops every buffered answer scoring at least `upper_bound`, best first,
    /// at most `limit` of them.
    pub fn emit(&mut self, upper_bound: f64, limit: usize) -> Vec<ScoredAnswer> {
        let mut out = Vec::new();
        while out.len() < limit {
            match self.heap.peek() {
                Some(top) if top.0.score >= upper_bound => {
                    let a = self.heap.pop().expect("peeked").0;
                    debug_assert!(self.last_emitted.is_none_or(|l| a.score <= l));
                    self.last_emitted = Some(a.score);
                    out.push(a);
                }
                _ => break,
            }
        }
        out
    }

    /// Releases everything (no further answers will be generated).
    pub fn drain(&mut self, limit: usize) -> Vec<ScoredAnswer> {
        self.emit(f64::NEG_INFINITY, limit)
    }
}
