use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Clustering;
use crate::error::{Error, Result};
use crate::graph::{DataGraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterAlgorithm {
    CloseToOne,
    #[default]
    GreedyMinimum,
    ConnectionNaive,
    AdjacencyNaive,
}

impl FromStr for ClusterAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "close1" => Ok(Self::CloseToOne),
            "greedymin" => Ok(Self::GreedyMinimum),
            "connection" => Ok(Self::ConnectionNaive),
            "adjacency" => Ok(Self::AdjacencyNaive),
            _ => Err(Error::Config(format!("unknown clustering algorithm `{s}`"))),
        }
    }
}

pub fn cluster(
    g: &DataGraph,
    algorithm: ClusterAlgorithm,
    max_cluster_size: usize,
    seed: u64,
) -> Result<Clustering> {
    match algorithm {
        ClusterAlgorithm::CloseToOne => cluster_close_to_1(g, max_cluster_size),
        ClusterAlgorithm::GreedyMinimum => cluster_greedy_minimum(g, max_cluster_size, seed),
        ClusterAlgorithm::ConnectionNaive => cluster_connection_naive(g, max_cluster_size, seed),
        ClusterAlgorithm::AdjacencyNaive => cluster_adjacency_naive(g, max_cluster_size),
    }
}

fn check_size(max_cluster_size: usize) -> Result<()> {
    if max_cluster_size == 0 {
        return Err(Error::Config("maximum cluster size must be at least 1".into()));
    }
    Ok(())
}

#[derive(PartialEq)]
struct Ratio {
    key: f64,
    seq: u64,
    node: NodeId,
}

impl Eq for Ratio {}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    // min-heap on (key, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Grows each cluster from the lowest unused node, always taking the frontier
/// neighbor whose forward/backward weight ratio is closest to 1.
pub fn cluster_close_to_1(g: &DataGraph, max_cluster_size: usize) -> Result<Clustering> {
    check_size(max_cluster_size)?;
    let n = g.node_count();
    let mut used = vec![false; n];
    let mut groups = Vec::new();
    let mut seq = 0u64;
    for seed in 0..n {
        if used[seed] {
            continue;
        }
        used[seed] = true;
        let mut members = vec![seed as NodeId];
        let mut heap = BinaryHeap::new();
        let mut push_frontier = |u: NodeId, heap: &mut BinaryHeap<Ratio>, used: &[bool]| {
            for s in g.slot_range(u) {
                let v = g.adjacent()[s];
                if used[v as usize] {
                    continue;
                }
                let w1 = g.weights()[s] as f64;
                let w2 = g.weights()[g.partner(s as u32) as usize] as f64;
                heap.push(Ratio {
                    key: (w1 / w2 - 1.0).abs(),
                    seq,
                    node: v,
                });
                seq += 1;
            }
        };
        push_frontier(seed as NodeId, &mut heap, &used);
        while members.len() < max_cluster_size {
            let Some(Ratio { node, .. }) = heap.pop() else {
                break;
            };
            if used[node as usize] {
                continue;
            }
            used[node as usize] = true;
            members.push(node);
            push_frontier(node, &mut heap, &used);
        }
        groups.push(members);
    }
    Clustering::from_groups(&groups, n, max_cluster_size)
}

/// Seeds at a random unused node and adds unused neighbors of members in
/// order of their distance from the seed.
pub fn cluster_greedy_minimum(g: &DataGraph, max_cluster_size: usize, seed: u64) -> Result<Clustering> {
    check_size(max_cluster_size)?;
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.shuffle(&mut rng);
    let mut used = vec![false; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut groups = Vec::new();
    for &start in &order {
        if used[start as usize] {
            continue;
        }
        used[start as usize] = true;
        dist[start as usize] = 0.0;
        let mut members = vec![start];
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((OrdF64(0.0), start)));
        'grow: while let Some(Reverse((OrdF64(d), m))) = heap.pop() {
            if d > dist[m as usize] {
                continue;
            }
            for s in g.out_edges(m) {
                let v = s.target as usize;
                let nd = d + s.weight as f64;
                if !used[v] {
                    if members.len() == max_cluster_size {
                        break 'grow;
                    }
                    used[v] = true;
                    members.push(s.target);
                    dist[v] = nd;
                    heap.push(Reverse((OrdF64(nd), s.target)));
                } else if nd < dist[v] && members.contains(&s.target) {
                    dist[v] = nd;
                    heap.push(Reverse((OrdF64(nd), s.target)));
                }
            }
        }
        for &m in &members {
            dist[m as usize] = f64::INFINITY;
        }
        groups.push(members);
    }
    Clustering::from_groups(&groups, n, max_cluster_size)
}

/// Grows each cluster by repeatedly absorbing a random frontier node.
pub fn cluster_connection_naive(g: &DataGraph, max_cluster_size: usize, seed: u64) -> Result<Clustering> {
    check_size(max_cluster_size)?;
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.shuffle(&mut rng);
    let mut used = vec![false; n];
    let mut groups = Vec::new();
    for &start in &order {
        if used[start as usize] {
            continue;
        }
        used[start as usize] = true;
        let mut members = vec![start];
        let mut frontier: Vec<NodeId> = g.out_edges(start).map(|s| s.target).collect();
        while members.len() < max_cluster_size && !frontier.is_empty() {
            let v = frontier.swap_remove(rng.gen_range(0..frontier.len()));
            if used[v as usize] {
                continue;
            }
            used[v as usize] = true;
            members.push(v);
            frontier.extend(g.out_edges(v).map(|s| s.target).filter(|&t| !used[t as usize]));
        }
        groups.push(members);
    }
    Clustering::from_groups(&groups, n, max_cluster_size)
}

/// Sorts nodes by their neighbor lists and fills clusters in that order,
/// keeping runs of identical adjacency together when they fit in one cluster.
/// Clusters need not be connected.
pub fn cluster_adjacency_naive(g: &DataGraph, max_cluster_size: usize) -> Result<Clustering> {
    check_size(max_cluster_size)?;
    let n = g.node_count();
    let fingerprints: Vec<Vec<NodeId>> = (0..n as NodeId)
        .map(|u| {
            let mut f: Vec<NodeId> = g.out_edges(u).map(|s| s.target).collect();
            f.sort_unstable();
            f.dedup();
            f
        })
        .collect();
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.sort_by(|&a, &b| fingerprints[a as usize].cmp(&fingerprints[b as usize]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<NodeId>> = Vec::new();
    for same in order.chunk_by(|&a, &b| fingerprints[a as usize] == fingerprints[b as usize]) {
        // a run of identical fingerprints opens a fresh cluster when it would not fit
        let room = groups.last().map_or(0, |g| max_cluster_size - g.len());
        if same.len() > room && same.len() <= max_cluster_size {
            groups.push(Vec::new());
        }
        for &v in same {
            if groups.last().is_none_or(|g| g.len() == max_cluster_size) {
                groups.push(Vec::new());
            }
            groups.last_mut().expect("just pushed").push(v);
        }
    }
    groups.retain(|g| !g.is_empty());
    Clustering::from_groups(&groups, n, max_cluster_size)
}

/// Merges adjacent clusters while their combined size fits, smallest first.
///
/// Connected clusters stay connected. Cluster ids are reassigned by the
/// smallest member so the result is deterministic.
pub fn merge_small_clusters(g: &DataGraph, clustering: &Clustering) -> Result<Clustering> {
    let max = clustering.max_cluster_size();
    let k = clustering.k();
    // union-find over clusters
    let mut parent: Vec<usize> = (0..k).collect();
    let mut size: Vec<usize> = (0..k).map(|c| clustering.size(c as u32)).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut members: Vec<Vec<NodeId>> = (0..k).map(|c| clustering.members(c as u32).to_vec()).collect();
    loop {
        let mut by_size: Vec<usize> = (0..k).filter(|&c| find(&mut parent, c) == c).collect();
        by_size.sort_by_key(|&c| (size[c], c));
        let mut merged_any = false;
        for c in by_size {
            if find(&mut parent, c) != c {
                continue;
            }
            let mut neighbors = BTreeSet::new();
            for &u in &members[c] {
                for s in g.out_edges(u) {
                    let d = find(&mut parent, clustering.cluster_of(s.target) as usize);
                    if d != c {
                        neighbors.insert(d);
                    }
                }
            }
            let best = neighbors
                .into_iter()
                .filter(|&d| size[c] + size[d] <= max)
                .min_by_key(|&d| (size[d], d));
            if let Some(d) = best {
                let (keep, gone) = (c.min(d), c.max(d));
                parent[gone] = keep;
                size[keep] += size[gone];
                let moved = std::mem::take(&mut members[gone]);
                members[keep].extend(moved);
                merged_any = true;
            }
        }
        if !merged_any {
            break;
        }
    }
    let mut groups: Vec<Vec<NodeId>> = members.into_iter().filter(|m| !m.is_empty()).collect();
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    Clustering::from_groups(&groups, clustering.node_count(), max)
}

/// Repacks a clustering into fewer, fuller connected clusters.
///
/// A depth-first spanning forest is built that follows edges inside the
/// existing clusters before edges leaving them. The forest is then cut bottom
/// up: each node keeps the smallest child subtrees that still fit beside it
/// and the others become clusters of their own. Undersized neighbours are
/// finally merged with [`merge_small_clusters`].
pub fn pack_clusters(g: &DataGraph, clustering: &Clustering) -> Result<Clustering> {
    let max = clustering.max_cluster_size();
    let n = g.node_count();
    const NONE: NodeId = NodeId::MAX;
    let mut parent = vec![NONE; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    for c in 0..clustering.k() as u32 {
        for &root in clustering.members(c) {
            if seen[root as usize] {
                continue;
            }
            seen[root as usize] = true;
            stack.push(root);
            while let Some(u) = stack.pop() {
                order.push(u);
                let home = clustering.cluster_of(u);
                // pushed last, popped first: same-cluster neighbours
                for inside in [false, true] {
                    for s in g.out_edges(u) {
                        let v = s.target;
                        if !seen[v as usize] && (clustering.cluster_of(v) == home) == inside {
                            seen[v as usize] = true;
                            parent[v as usize] = u;
                            stack.push(v);
                        }
                    }
                }
            }
        }
    }

    let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for &u in &order {
        if parent[u as usize] != NONE {
            children[parent[u as usize] as usize].push(u);
        }
    }
    let mut residual = vec![1usize; n];
    let mut cut = vec![false; n];
    for &u in order.iter().rev() {
        let kids = &mut children[u as usize];
        kids.sort_by_key(|&c| (residual[c as usize], c));
        let mut total = 1;
        for &c in kids.iter() {
            if total + residual[c as usize] <= max {
                total += residual[c as usize];
            } else {
                cut[c as usize] = true;
            }
        }
        residual[u as usize] = total;
        cut[u as usize] |= parent[u as usize] == NONE;
    }

    let mut part = vec![0usize; n];
    let mut groups: Vec<Vec<NodeId>> = Vec::new();
    for &u in &order {
        if cut[u as usize] {
            part[u as usize] = groups.len();
            groups.push(vec![u]);
        } else {
            let p = part[parent[u as usize] as usize];
            part[u as usize] = p;
            groups[p].push(u);
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    let packed = Clustering::from_groups(&groups, n, max)?;
    merge_small_clusters(g, &packed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}
