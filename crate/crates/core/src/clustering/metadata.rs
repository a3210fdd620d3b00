use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::{ClusterId, Clustering};
use crate::graph::{DataGraph, NodeId};

/// Cheapest intra-cluster path from a node adjacent to cluster `from` to a
/// node adjacent to cluster `to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InOutCost {
    pub from: ClusterId,
    pub to: ClusterId,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterMetadata {
    pub diameter: Vec<f64>,
    pub min_in_out: Vec<f64>,
    /// Per cluster, sorted by `(from, to)`; present only when requested.
    pub in_out_table: Option<Vec<Vec<InOutCost>>>,
}

impl ClusterMetadata {
    pub fn len(&self) -> usize {
        self.diameter.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diameter.is_empty()
    }

    pub fn in_out(&self, c: ClusterId, from: ClusterId, to: ClusterId) -> Option<f64> {
        let row = self.in_out_table.as_ref()?.get(c as usize)?;
        row.binary_search_by_key(&(from, to), |e| (e.from, e.to))
            .ok()
            .map(|i| row[i].cost)
    }
}

/// Shortest paths inside one cluster, using only edges between its members.
pub(crate) fn intra_distances(g: &DataGraph, clustering: &Clustering, c: ClusterId) -> Vec<Vec<f64>> {
    let members = clustering.members(c);
    let local: BTreeMap<NodeId, usize> = members.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let size = members.len();
    let mut all = Vec::with_capacity(size);
    for src in 0..size {
        let mut dist = vec![f64::INFINITY; size];
        dist[src] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((Key(0.0), src)));
        while let Some(Reverse((Key(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for s in g.out_edges(members[u]) {
                if let Some(&v) = local.get(&s.target) {
                    let nd = d + s.weight as f64;
                    if nd < dist[v] {
                        dist[v] = nd;
                        heap.push(Reverse((Key(nd), v)));
                    }
                }
            }
        }
        all.push(dist);
    }
    all
}

/// Diameter over reachable member pairs, and cheapest entry-to-exit costs
/// over pairs of distinct neighboring clusters.
pub fn compute_cluster_metadata(g: &DataGraph, clustering: &Clustering, full_table: bool) -> ClusterMetadata {
    let k = clustering.k();
    let mut meta = ClusterMetadata {
        diameter: Vec::with_capacity(k),
        min_in_out: Vec::with_capacity(k),
        in_out_table: full_table.then(Vec::new),
    };
    for c in 0..k as ClusterId {
        let members = clustering.members(c);
        let dist = intra_distances(g, clustering, c);
        let diameter = dist
            .iter()
            .flatten()
            .copied()
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max);

        // external clusters each member touches; slots come in pairs, so
        // touching a cluster means both an in-edge from it and an out-edge to it
        let touches: Vec<BTreeSet<ClusterId>> = members
            .iter()
            .map(|&m| {
                g.out_edges(m)
                    .map(|s| clustering.cluster_of(s.target))
                    .filter(|&t| t != c)
                    .collect()
            })
            .collect();

        let mut min_in_out = f64::INFINITY;
        let mut table: BTreeMap<(ClusterId, ClusterId), f64> = BTreeMap::new();
        for (a, from) in touches.iter().enumerate() {
            for (b, to) in touches.iter().enumerate() {
                let d = dist[a][b];
                if from.is_empty() || to.is_empty() || !d.is_finite() {
                    continue;
                }
                let single_same = from.len() == 1 && to.len() == 1 && from == to;
                if !single_same {
                    min_in_out = min_in_out.min(d);
                }
                if full_table {
                    for &p in from {
                        for &q in to {
                            if p != q {
                                let e = table.entry((p, q)).or_insert(f64::INFINITY);
                                *e = e.min(d);
                            }
                        }
                    }
                }
            }
        }
        meta.diameter.push(diameter);
        meta.min_in_out.push(if min_in_out.is_finite() { min_in_out } else { 0.0 });
        if let Some(t) = meta.in_out_table.as_mut() {
            t.push(
                table
                    .into_iter()
                    .map(|((from, to), cost)| InOutCost { from, to, cost })
                    .collect(),
            );
        }
    }
    meta
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct Key(f64);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    #[test]
    fn singleton_clusters_are_zero() {
        let mut b = GraphBuilder::with_nodes(vec![1.0; 3], vec![0; 3]);
        b.add_link(0, 1, 1.0, 1.0, 1.0);
        b.add_link(1, 2, 1.0, 1.0, 1.0);
        let g = b.build().unwrap();
        let m = compute_cluster_metadata(&g, &Clustering::identity(3), true);
        assert_eq!(m.diameter, vec![0.0; 3]);
        assert_eq!(m.min_in_out, vec![0.0; 3]);
        assert_eq!(m.in_out(1, 0, 2), Some(0.0));
        assert_eq!(m.in_out(1, 0, 0), None);
    }

    #[test]
    fn path_cluster_diameter() {
        // a -> b -> c with unit forward weights and heavy backward weights
        let mut b = GraphBuilder::with_nodes(vec![1.0; 3], vec![0; 3]);
        b.add_link(0, 1, 1.0, 5.0, 1.0);
        b.add_link(1, 2, 1.0, 5.0, 1.0);
        let g = b.build().unwrap();
        let c = Clustering::from_mapping(vec![0; 3], 3).unwrap();
        let m = compute_cluster_metadata(&g, &c, false);
        // the longest shortest path is c -> b -> a
        assert_eq!(m.diameter, vec![10.0]);
        assert!(m.min_in_out[0] <= m.diameter[0]);
    }

    #[test]
    fn entry_exit_cost_through_cluster() {
        // x -> [a -> b] -> y
        let mut b = GraphBuilder::with_nodes(vec![1.0; 4], vec![0; 4]);
        b.add_link(0, 1, 1.0, 1.0, 1.0);
        b.add_link(1, 2, 2.0, 3.0, 1.0);
        b.add_link(2, 3, 1.0, 1.0, 1.0);
        let g = b.build().unwrap();
        let c = Clustering::from_mapping(vec![0, 1, 1, 2], 2).unwrap();
        let m = compute_cluster_metadata(&g, &c, true);
        assert_eq!(m.min_in_out[1], 2.0);
        assert_eq!(m.in_out(1, 0, 2), Some(2.0));
        assert_eq!(m.in_out(1, 2, 0), Some(3.0));
    }
}
