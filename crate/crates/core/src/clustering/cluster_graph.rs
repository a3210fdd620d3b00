use std::collections::BTreeMap;

use super::{combine_edge_weights, combine_prestige, ClusterId, Clustering, WeightConfig};
use crate::error::Result;
use crate::graph::{DataGraph, Direction, GraphBuilder, NodeId};

/// Cluster-level graph plus, per superedge slot, the cheapest member edge.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterGraph {
    pub graph: DataGraph,
    pub crossing_min: Vec<f32>,
}

impl ClusterGraph {
    pub fn superedge_slot(&self, from: ClusterId, to: ClusterId) -> Option<usize> {
        self.graph
            .slot_range(from)
            .find(|&s| self.graph.adjacent()[s] == to)
    }
}

#[derive(Default)]
struct Members {
    weights: Vec<f64>,
    forward: usize,
    backward: usize,
}

/// A superedge `Ci -> Cj` exists iff some slot leads from a member of `Ci` to
/// a member of `Cj`, `i != j`. Its weight combines all such member slots.
pub fn build_cluster_graph(g: &DataGraph, clustering: &Clustering, wcfg: WeightConfig) -> Result<ClusterGraph> {
    let k = clustering.k();
    let map = clustering.node_mapping();
    let mut prestige = Vec::with_capacity(k);
    for c in 0..k as ClusterId {
        let values: Vec<f64> = clustering
            .members(c)
            .iter()
            .map(|&m| g.prestige()[m as usize] as f64)
            .collect();
        prestige.push(combine_prestige(&values, wcfg.prestige)? as f32);
    }
    let mut pairs: BTreeMap<(ClusterId, ClusterId), Members> = BTreeMap::new();
    for u in 0..g.node_count() as NodeId {
        let cu = map[u as usize];
        for s in g.out_edges(u) {
            let cv = map[s.target as usize];
            if cu == cv {
                continue;
            }
            let e = pairs.entry((cu, cv)).or_default();
            e.weights.push(s.weight as f64);
            match s.direction {
                Direction::Forward => e.forward += 1,
                Direction::Backward => e.backward += 1,
            }
        }
    }

    let mut builder = GraphBuilder::with_nodes(prestige, vec![0; k]);
    let mut mins = Vec::new();
    for (&(i, j), e) in &pairs {
        let is_forward = e.forward > e.backward || (e.forward == e.backward && i < j);
        if !is_forward {
            continue;
        }
        let back = &pairs[&(j, i)];
        let fw = combine_edge_weights(&e.weights, wcfg.edge)? as f32;
        let bw = combine_edge_weights(&back.weights, wcfg.edge)? as f32;
        builder.add_link(i, j, fw, bw, e.weights.len() as f32);
        mins.push((i, j, min_weight(&e.weights)));
        mins.push((j, i, min_weight(&back.weights)));
    }
    let graph = builder.build()?;

    let mut crossing_min = vec![0.0f32; graph.slot_count()];
    let lookup: BTreeMap<(ClusterId, ClusterId), f32> =
        mins.into_iter().map(|(i, j, w)| ((i, j), w)).collect();
    for c in 0..k as ClusterId {
        for s in graph.slot_range(c) {
            crossing_min[s] = lookup[&(c, graph.adjacent()[s])];
        }
    }
    Ok(ClusterGraph {
        graph,
        crossing_min,
    })
}

fn min_weight(ws: &[f64]) -> f32 {
    ws.iter().copied().fold(f64::INFINITY, f64::min) as f32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{cluster_close_to_1, EdgeCombiner, PrestigeCombiner};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn simple_graph(n: usize, seed: u64) -> DataGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = GraphBuilder::with_nodes(
            (0..n).map(|_| rng.gen_range(0.0..3.0)).collect(),
            vec![0; n],
        );
        let mut seen = BTreeSet::new();
        for _ in 0..2 * n {
            let u = rng.gen_range(0..n as NodeId);
            let v = rng.gen_range(0..n as NodeId);
            if u != v && seen.insert((u.min(v), u.max(v))) {
                b.add_link(u, v, rng.gen_range(0.5..2.0), rng.gen_range(0.5..4.0), 1.0);
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn identity_clustering_reproduces_graph() {
        for seed in 0..10 {
            let g = simple_graph(30, seed);
            let cg = build_cluster_graph(&g, &Clustering::identity(30), WeightConfig::default()).unwrap();
            assert_eq!(cg.graph.prestige(), g.prestige());
            for u in 0..30 {
                let mut a: Vec<_> = g.out_edges(u).map(|s| (s.target, s.weight)).collect();
                let mut b: Vec<_> = cg.graph.out_edges(u).map(|s| (s.target, s.weight)).collect();
                a.sort_by(|x, y| x.partial_cmp(y).unwrap());
                b.sort_by(|x, y| x.partial_cmp(y).unwrap());
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn single_cluster_has_no_superedges() {
        let g = simple_graph(12, 2);
        let c = Clustering::from_mapping(vec![0; 12], 12).unwrap();
        let cg = build_cluster_graph(&g, &c, WeightConfig::default()).unwrap();
        assert_eq!(cg.graph.node_count(), 1);
        assert_eq!(cg.graph.slot_count(), 0);
    }

    #[test]
    fn superedges_match_membership_scan() {
        for seed in 0..10 {
            let g = simple_graph(200, seed);
            let c = cluster_close_to_1(&g, 8).unwrap();
            let wcfg = WeightConfig {
                edge: EdgeCombiner::Min,
                prestige: PrestigeCombiner::Max,
            };
            let cg = build_cluster_graph(&g, &c, wcfg).unwrap();
            let mut expected = BTreeSet::new();
            for u in 0..200 {
                for s in g.out_edges(u) {
                    let (a, b) = (c.cluster_of(u), c.cluster_of(s.target));
                    if a != b {
                        expected.insert((a, b));
                    }
                }
            }
            let mut got = BTreeSet::new();
            for a in 0..c.k() as ClusterId {
                for s in cg.graph.out_edges(a) {
                    assert!(got.insert((a, s.target)), "duplicate superedge");
                    // with the min combiner the weight is the cheapest member
                    assert_eq!(s.weight, cg.crossing_min[s.index as usize]);
                }
            }
            assert_eq!(got, expected);
        }
    }
}
