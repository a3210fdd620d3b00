use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::activation::init_activation;
use super::tree::assemble;
use super::{Collector, KeywordSets, SearchConfig, SearchResult, SearchStats};
use crate::error::Result;
use crate::graph::{DataGraph, NodeId};

const NO_NEXT: NodeId = NodeId::MAX;

#[derive(PartialEq)]
struct Queued {
    priority: f64,
    seq: u64,
    node: NodeId,
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // max-heap on activation, first-in first-out among equals
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then(other.seq.cmp(&self.seq))
    }
}

struct State {
    w: usize,
    dist: Vec<f64>,
    next: Vec<NodeId>,
    next_weight: Vec<f64>,
    /// `parents[v]` holds `(u, weight)` for explored edges `u -> v`.
    parents: Vec<Vec<(NodeId, f64)>>,
}

impl State {
    fn dist(&self, u: NodeId, i: usize) -> f64 {
        self.dist[u as usize * self.w + i]
    }

    fn complete(&self, u: NodeId) -> bool {
        (0..self.w).all(|i| self.dist(u, i).is_finite())
    }

    /// Sets `u`'s distance to keyword `i` via `via` if shorter and pushes the
    /// improvement up through recorded parents. Returns nodes that improved.
    fn relax(&mut self, u: NodeId, i: usize, via: NodeId, weight: f64) -> Vec<NodeId> {
        let mut improved = Vec::new();
        let mut work = vec![(u, via, weight)];
        while let Some((x, y, wt)) = work.pop() {
            let nd = self.dist(y, i) + wt;
            let slot = x as usize * self.w + i;
            if nd < self.dist[slot] {
                self.dist[slot] = nd;
                self.next[slot] = y;
                self.next_weight[slot] = wt;
                improved.push(x);
                for &(q, qw) in &self.parents[x as usize] {
                    work.push((q, x, qw));
                }
            }
        }
        improved
    }
}

/// Backward expansion from keyword nodes and forward expansion from reached
/// nodes, both ordered by spreading activation. Each node keeps only its best
/// known path per keyword, so some answers reachable by longer paths are
/// never produced.
pub fn bidirectional_search(g: &DataGraph, ks: &KeywordSets, cfg: &SearchConfig) -> Result<SearchResult> {
    let start = Instant::now();
    cfg.validate()?;
    ks.check_nodes(g)?;
    let w = ks.len();
    let n = g.node_count();
    let mut act = init_activation(ks, g.prestige(), cfg.mu);
    let mut st = State {
        w,
        dist: vec![f64::INFINITY; n * w],
        next: vec![NO_NEXT; n * w],
        next_weight: vec![0.0; n * w],
        parents: vec![Vec::new(); n],
    };
    let mut touched = vec![false; n];
    let mut explored = vec![false; n];
    let mut in_done = vec![false; n];
    let mut out_done = vec![false; n];
    let mut out_queued = vec![false; n];
    let mut q_in = BinaryHeap::new();
    let mut q_out: BinaryHeap<Queued> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut out = Collector::new(cfg, g.prestige());

    let emit_root = |root: NodeId, st: &State, out: &mut Collector| {
        let tree = assemble(root, w, n, |i, x| {
            let next = st.next[x as usize * w + i];
            (next != x).then(|| (next, st.next_weight[x as usize * w + i]))
        });
        if let Some(tree) = tree {
            out.offer(tree, ks);
        }
    };

    for (i, set) in ks.sets().iter().enumerate() {
        for &u in set {
            st.dist[u as usize * w + i] = 0.0;
            st.next[u as usize * w + i] = u;
        }
    }
    for u in ks.union() {
        touched[u as usize] = true;
        q_in.push(Queued {
            priority: act.total(u),
            seq,
            node: u,
        });
        seq += 1;
        if st.complete(u) {
            emit_root(u, &st, &mut out);
        }
    }

    loop {
        if out.budget_spent() {
            break;
        }
        let take_in = match (q_in.peek(), q_out.peek()) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a.priority >= b.priority,
        };
        if take_in {
            let u = q_in.pop().expect("peeked").node;
            if in_done[u as usize] {
                continue;
            }
            in_done[u as usize] = true;
            explored[u as usize] = true;
            let preds: Vec<(NodeId, f32)> = g.in_edges(u).collect();
            for &(p, wt) in &preds {
                touched[p as usize] = true;
                st.parents[u as usize].push((p, wt as f64));
                for i in 0..w {
                    if st.dist(u, i).is_finite() {
                        for x in st.relax(p, i, u, wt as f64) {
                            if st.complete(x) {
                                emit_root(x, &st, &mut out);
                            }
                        }
                    }
                }
            }
            for i in 0..w {
                act.spread(u, i, &preds);
            }
            for &(p, _) in &preds {
                if !in_done[p as usize] {
                    q_in.push(Queued {
                        priority: act.total(p),
                        seq,
                        node: p,
                    });
                    seq += 1;
                }
            }
            // every node reached from the keyword side may root an answer
            for v in std::iter::once(u).chain(preds.iter().map(|&(p, _)| p)) {
                if !out_queued[v as usize] {
                    out_queued[v as usize] = true;
                    q_out.push(Queued {
                        priority: act.total(v),
                        seq,
                        node: v,
                    });
                    seq += 1;
                }
            }
        } else {
            let u = q_out.pop().expect("peeked").node;
            if out_done[u as usize] {
                continue;
            }
            out_done[u as usize] = true;
            explored[u as usize] = true;
            let succ: Vec<(NodeId, f32)> = g.out_edges(u).map(|s| (s.target, s.weight)).collect();
            for &(v, wt) in &succ {
                touched[v as usize] = true;
                st.parents[v as usize].push((u, wt as f64));
                for i in 0..w {
                    if st.dist(v, i).is_finite() {
                        for x in st.relax(u, i, v, wt as f64) {
                            if st.complete(x) {
                                emit_root(x, &st, &mut out);
                            }
                        }
                    }
                }
            }
            for i in 0..w {
                act.spread(u, i, &succ);
            }
            for &(v, _) in &succ {
                if !out_queued[v as usize] {
                    out_queued[v as usize] = true;
                    q_out.push(Queued {
                        priority: act.total(v),
                        seq,
                        node: v,
                    });
                    seq += 1;
                }
            }
        }
    }

    let (answers, candidates) = out.finish();
    Ok(SearchResult {
        stats: SearchStats {
            nodes_touched: touched.iter().filter(|&&t| t).count() as u64,
            nodes_explored: explored.iter().filter(|&&t| t).count() as u64,
            elapsed: start.elapsed(),
            answers_emitted: answers.len() as u64,
            candidates: candidates as u64,
        },
        answers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::search::backward_search;

    #[test]
    fn single_node_answer() {
        let mut b = GraphBuilder::with_nodes(vec![1.0; 2], vec![0; 2]);
        b.add_link(0, 1, 1.0, 1.0, 1.0);
        let g = b.build().unwrap();
        let ks = KeywordSets::new(vec![vec![0], vec![0]]).unwrap();
        let r = bidirectional_search(&g, &ks, &SearchConfig::default()).unwrap();
        assert_eq!(r.answers[0].tree.nodes(), &[0]);
    }

    /// Root 4 links to 1 and 5; 1 links to 2 and, more expensively, to 3.
    /// Node 5 holds the first term, nodes 2 and 3 the second.
    fn lost_answer_example() -> (DataGraph, KeywordSets) {
        let mut b = GraphBuilder::with_nodes(vec![1.0; 6], vec![0; 6]);
        b.add_link(4, 1, 1.0, 50.0, 1.0);
        b.add_link(4, 5, 1.0, 50.0, 1.0);
        b.add_link(1, 2, 1.0, 50.0, 1.0);
        b.add_link(1, 3, 2.0, 50.0, 1.0);
        let g = b.build().unwrap();
        (g, KeywordSets::new(vec![vec![5], vec![2, 3]]).unwrap())
    }

    fn rooted_at_4(r: &SearchResult) -> Vec<Vec<NodeId>> {
        r.answers
            .iter()
            .filter(|a| a.tree.root() == 4)
            .map(|a| a.tree.nodes().to_vec())
            .collect()
    }

    #[test]
    fn keeps_only_best_path_per_keyword() {
        let (g, ks) = lost_answer_example();
        let cfg = SearchConfig {
            candidate_budget: None,
            ..SearchConfig::default()
        };
        let bidi = bidirectional_search(&g, &ks, &cfg).unwrap();
        assert_eq!(rooted_at_4(&bidi), vec![vec![1, 2, 4, 5]]);
        let backward = backward_search(&g, &ks, &cfg).unwrap();
        let mut both = rooted_at_4(&backward);
        both.sort();
        assert_eq!(both, vec![vec![1, 2, 4, 5], vec![1, 3, 4, 5]]);
    }

    #[test]
    fn answers_are_valid_trees() {
        let (g, ks) = lost_answer_example();
        let r = bidirectional_search(&g, &ks, &SearchConfig::default()).unwrap();
        assert!(!r.answers.is_empty());
        for a in &r.answers {
            for (i, &k) in a.tree.keyword_nodes().iter().enumerate() {
                assert!(ks.contains(i, k));
            }
        }
        assert!(r.stats.nodes_explored <= r.stats.nodes_touched);
    }
}
