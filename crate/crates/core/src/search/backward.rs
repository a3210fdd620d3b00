use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use super::tree::assemble;
use super::{Collector, KeywordSets, SearchConfig, SearchResult, SearchStats};
use crate::error::Result;
use crate::graph::{DataGraph, NodeId};
use crate::scoring::{edge_score_for_weight, tree_score, EdgeScoreVariant, ScoreConfig};

#[derive(Clone, Copy)]
struct Label {
    dist: f64,
    /// Next hop toward the iterator's source, with the edge weight.
    next: NodeId,
    weight: f64,
    settled: bool,
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    iter: usize,
    node: NodeId,
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.iter.cmp(&other.iter))
            .then(self.node.cmp(&other.node))
    }
}

/// Best score any tree whose edges weigh at least `min_weight` can reach.
fn score_bound(node_bound: f64, min_weight: f64, cfg: &ScoreConfig) -> f64 {
    let e = match cfg.edge_score {
        EdgeScoreVariant::AsWritten => 1.0,
        EdgeScoreVariant::ReciprocalSum if min_weight <= 0.0 => 1.0,
        v => edge_score_for_weight(min_weight, v),
    };
    tree_score(node_bound, e, cfg)
}

/// One single-source shortest-path iterator per keyword node, run on
/// reversed edges and interleaved by smallest tentative distance. A node
/// reached by iterators covering every keyword set roots candidate trees,
/// one per combination of reaching keyword nodes.
pub fn backward_search(g: &DataGraph, ks: &KeywordSets, cfg: &SearchConfig) -> Result<SearchResult> {
    let start = Instant::now();
    cfg.validate()?;
    ks.check_nodes(g)?;
    let w = ks.len();
    let n = g.node_count();
    let sources = ks.union();
    let positions: Vec<Vec<usize>> = sources
        .iter()
        .map(|&s| (0..w).filter(|&i| ks.contains(i, s)).collect())
        .collect();

    let prestige = g.prestige();
    let max_prestige = prestige.iter().copied().fold(0.0f32, f32::max) as f64;
    let node_bound = max_prestige
        + ks.sets()
            .iter()
            .map(|s| s.iter().map(|&u| prestige[u as usize]).fold(0.0f32, f32::max) as f64)
            .sum::<f64>();

    let mut labels: Vec<HashMap<NodeId, Label>> = vec![HashMap::new(); sources.len()];
    let mut heap = BinaryHeap::new();
    let mut touched = vec![false; n];
    let mut explored = vec![false; n];
    for (idx, &s) in sources.iter().enumerate() {
        labels[idx].insert(
            s,
            Label {
                dist: 0.0,
                next: s,
                weight: 0.0,
                settled: false,
            },
        );
        heap.push(Reverse(Entry {
            dist: 0.0,
            iter: idx,
            node: s,
        }));
        touched[s as usize] = true;
    }

    // per node, per keyword position: iterators that have settled it
    let mut visitors: HashMap<NodeId, Vec<Vec<usize>>> = HashMap::new();
    let mut out = Collector::new(cfg, prestige);

    'search: while let Some(Reverse(Entry { dist, iter, node: u })) = heap.pop() {
        let label = labels[iter][&u];
        if label.settled || dist > label.dist {
            continue;
        }
        labels[iter].get_mut(&u).expect("labelled").settled = true;
        explored[u as usize] = true;

        for (p, wt) in g.in_edges(u) {
            let nd = dist + wt as f64;
            let better = labels[iter].get(&p).is_none_or(|l| !l.settled && nd < l.dist);
            if better {
                labels[iter].insert(
                    p,
                    Label {
                        dist: nd,
                        next: u,
                        weight: wt as f64,
                        settled: false,
                    },
                );
                heap.push(Reverse(Entry {
                    dist: nd,
                    iter,
                    node: p,
                }));
                touched[p as usize] = true;
            }
        }

        let vis = visitors.entry(u).or_insert_with(|| vec![Vec::new(); w]);
        for &i in &positions[iter] {
            vis[i].push(iter);
        }
        let vis = vis.clone();
        // a combination is produced when its last member settles `u`; if that
        // member fills several positions, only its first position generates it
        for &i in &positions[iter] {
            let choices: Vec<Vec<usize>> = (0..w)
                .map(|j| match j.cmp(&i) {
                    Ordering::Less => vis[j].iter().copied().filter(|&x| x != iter).collect(),
                    Ordering::Equal => vec![iter],
                    Ordering::Greater => vis[j].clone(),
                })
                .collect();
            if choices.iter().any(Vec::is_empty) {
                continue;
            }
            let mut pick = vec![0usize; w];
            loop {
                let combo: Vec<usize> = (0..w).map(|j| choices[j][pick[j]]).collect();
                let tree = assemble(u, w, n, |j, x| {
                    let it = combo[j];
                    if x == sources[it] {
                        None
                    } else {
                        labels[it].get(&x).map(|l| (l.next, l.weight))
                    }
                });
                if let Some(tree) = tree {
                    out.offer(tree, ks);
                }
                if out.budget_spent() {
                    break 'search;
                }
                // odometer over the choice lists
                let mut j = 0;
                while j < w {
                    pick[j] += 1;
                    if pick[j] < choices[j].len() {
                        break;
                    }
                    pick[j] = 0;
                    j += 1;
                }
                if j == w {
                    break;
                }
            }
        }

        // discard stale heads so the bound uses a live distance
        while let Some(Reverse(top)) = heap.peek() {
            let l = labels[top.iter][&top.node];
            if l.settled || top.dist > l.dist {
                heap.pop();
            } else {
                break;
            }
        }
        match heap.peek() {
            Some(Reverse(top)) => out.emit(score_bound(node_bound, top.dist, &cfg.score)),
            None => break,
        }
        if out.done() {
            break;
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
