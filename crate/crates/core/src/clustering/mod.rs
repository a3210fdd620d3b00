//! Node partitioning, the cluster-level graph, and per-cluster metadata.

mod algorithms;
mod bounds;
mod cluster_graph;
mod metadata;

pub use algorithms::{
    cluster, cluster_adjacency_naive, cluster_close_to_1, cluster_connection_naive,
    cluster_greedy_minimum, merge_small_clusters, pack_clusters, ClusterAlgorithm,
};
pub use bounds::answer_cost_bounds;
pub use cluster_graph::{build_cluster_graph, ClusterGraph};
pub use metadata::{compute_cluster_metadata, ClusterMetadata, InOutCost};

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::NodeId;

pub type ClusterId = u32;

pub const DEFAULT_MAX_CLUSTER_SIZE: usize = 100;

/// Node to cluster assignment, with members grouped by cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    node_mapping: Vec<ClusterId>,
    node_order: Vec<NodeId>,
    cluster_offset: Vec<u32>,
    max_cluster_size: u32,
}

impl Clustering {
    /// Every node in its own cluster, cluster id = node id.
    pub fn identity(n: usize) -> Self {
        Self {
            node_mapping: (0..n as ClusterId).collect(),
            node_order: (0..n as NodeId).collect(),
            cluster_offset: (0..=n as u32).collect(),
            max_cluster_size: 1,
        }
    }

    /// Cluster ids must be dense; members are kept in ascending node order.
    pub fn from_mapping(node_mapping: Vec<ClusterId>, max_cluster_size: usize) -> Result<Self> {
        let k = node_mapping.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut counts = vec![0u32; k + 1];
        for &c in &node_mapping {
            counts[c as usize + 1] += 1;
        }
        for c in 0..k {
            let size = counts[c + 1] as usize;
            if size == 0 {
                return Err(Error::InvalidClustering(format!("cluster {c} is empty")));
            }
            if size > max_cluster_size {
                return Err(Error::InvalidClustering(format!(
                    "cluster {c} has {size} nodes, limit is {max_cluster_size}"
                )));
            }
            counts[c + 1] += counts[c];
        }
        let cluster_offset = counts.clone();
        let mut cursor = counts;
        let mut node_order = vec![0; node_mapping.len()];
        for (n, &c) in node_mapping.iter().enumerate() {
            node_order[cursor[c as usize] as usize] = n as NodeId;
            cursor[c as usize] += 1;
        }
        Ok(Self {
            node_mapping,
            node_order,
            cluster_offset,
            max_cluster_size: max_cluster_size as u32,
        })
    }

    /// Cluster `i` is `groups[i]`; groups must partition `0..n`.
    pub fn from_groups(groups: &[Vec<NodeId>], n: usize, max_cluster_size: usize) -> Result<Self> {
        let mut mapping = vec![ClusterId::MAX; n];
        for (c, g) in groups.iter().enumerate() {
            for &v in g {
                let slot = mapping.get_mut(v as usize).ok_or_else(|| {
                    Error::InvalidClustering(format!("node {v} out of range"))
                })?;
                if *slot != ClusterId::MAX {
                    return Err(Error::InvalidClustering(format!(
                        "node {v} assigned twice"
                    )));
                }
                *slot = c as ClusterId;
            }
        }
        if let Some(v) = mapping.iter().position(|&c| c == ClusterId::MAX) {
            return Err(Error::InvalidClustering(format!("node {v} not assigned")));
        }
        Self::from_mapping(mapping, max_cluster_size)
    }

    /// Rebuilds from stored arrays, checking that they agree with each other.
    pub fn from_parts(
        node_mapping: Vec<ClusterId>,
        node_order: Vec<NodeId>,
        cluster_offset: Vec<u32>,
        max_cluster_size: u32,
    ) -> Result<Self> {
        let c = Self::from_mapping(node_mapping, max_cluster_size as usize)?;
        if c.cluster_offset != cluster_offset {
            return Err(Error::InvalidClustering("cluster offsets disagree with mapping".into()));
        }
        for cl in 0..c.k() {
            let mut stored = node_order
                .get(c.range(cl as ClusterId))
                .ok_or_else(|| Error::InvalidClustering("node order too short".into()))?
                .to_vec();
            stored.sort_unstable();
            if stored != c.members(cl as ClusterId) {
                return Err(Error::InvalidClustering(format!(
                    "node order disagrees with mapping in cluster {cl}"
                )));
            }
        }
        if node_order.len() != c.node_order.len() {
            return Err(Error::InvalidClustering("node order length".into()));
        }
        Ok(Self { node_order, ..c })
    }

    pub fn node_count(&self) -> usize {
        self.node_mapping.len()
    }

    pub fn k(&self) -> usize {
        self.cluster_offset.len() - 1
    }

    pub fn max_cluster_size(&self) -> usize {
        self.max_cluster_size as usize
    }

    pub fn node_mapping(&self) -> &[ClusterId] {
        &self.node_mapping
    }

    pub fn node_order(&self) -> &[NodeId] {
        &self.node_order
    }

    pub fn cluster_offset(&self) -> &[u32] {
        &self.cluster_offset
    }

    pub fn cluster_of(&self, n: NodeId) -> ClusterId {
        self.node_mapping[n as usize]
    }

    fn range(&self, c: ClusterId) -> std::ops::Range<usize> {
        self.cluster_offset[c as usize] as usize..self.cluster_offset[c as usize + 1] as usize
    }

    pub fn members(&self, c: ClusterId) -> &[NodeId] {
        &self.node_order[self.range(c)]
    }

    pub fn size(&self, c: ClusterId) -> usize {
        self.range(c).len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeCombiner {
    /// `1/W = sum(1/w)`
    #[default]
    InverseSum,
    /// `1/W = mean(1/w)`
    HarmonicMean,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrestigeCombiner {
    #[default]
    Sum,
    Max,
    Avg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WeightConfig {
    pub edge: EdgeCombiner,
    pub prestige: PrestigeCombiner,
}

impl FromStr for EdgeCombiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "invsum" => Ok(Self::InverseSum),
            "harmonic" => Ok(Self::HarmonicMean),
            "min" => Ok(Self::Min),
            _ => Err(Error::Config(format!("unknown edge combiner `{s}`"))),
        }
    }
}

impl FromStr for PrestigeCombiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Self::Sum),
            "max" => Ok(Self::Max),
            "avg" => Ok(Self::Avg),
            _ => Err(Error::Config(format!("unknown prestige combiner `{s}`"))),
        }
    }
}

pub fn combine_edge_weights(weights: &[f64], combiner: EdgeCombiner) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::EmptyCombination);
    }
    let inv: f64 = weights.iter().map(|w| 1.0 / w).sum();
    let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
    // rounding may otherwise cross the smallest weight
    Ok(match combiner {
        EdgeCombiner::InverseSum => (1.0 / inv).min(min),
        EdgeCombiner::HarmonicMean => (weights.len() as f64 / inv).max(min),
        EdgeCombiner::Min => min,
    })
}

pub fn combine_prestige(values: &[f64], combiner: PrestigeCombiner) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyCombination);
    }
    let sum: f64 = values.iter().sum();
    Ok(match combiner {
        PrestigeCombiner::Sum => sum,
        PrestigeCombiner::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        PrestigeCombiner::Avg => sum / values.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn edge_combiner_examples() {
        let w = [2.0, 2.0];
        assert_eq!(combine_edge_weights(&w, EdgeCombiner::InverseSum).unwrap(), 1.0);
        assert_eq!(combine_edge_weights(&w, EdgeCombiner::HarmonicMean).unwrap(), 2.0);
        assert_eq!(combine_edge_weights(&w, EdgeCombiner::Min).unwrap(), 2.0);
        for c in [EdgeCombiner::InverseSum, EdgeCombiner::HarmonicMean, EdgeCombiner::Min] {
            assert_eq!(combine_edge_weights(&[0.7], c).unwrap(), 0.7);
        }
        assert!(matches!(
            combine_edge_weights(&[], EdgeCombiner::Min),
            Err(Error::EmptyCombination)
        ));
    }

    #[test]
    fn prestige_combiner_examples() {
        let p = [1.0, 2.0, 3.0];
        assert_eq!(combine_prestige(&p, PrestigeCombiner::Sum).unwrap(), 6.0);
        assert_eq!(combine_prestige(&p, PrestigeCombiner::Max).unwrap(), 3.0);
        assert_eq!(combine_prestige(&p, PrestigeCombiner::Avg).unwrap(), 2.0);
        for c in [PrestigeCombiner::Sum, PrestigeCombiner::Max, PrestigeCombiner::Avg] {
            assert_eq!(combine_prestige(&[4.5], c).unwrap(), 4.5);
        }
    }

    #[test]
    fn mapping_order_offsets_agree() {
        let c = Clustering::from_mapping(vec![1, 0, 1, 2, 0], 2).unwrap();
        assert_eq!(c.k(), 3);
        assert_eq!(c.cluster_offset(), &[0, 2, 4, 5]);
        assert_eq!(c.node_order(), &[1, 4, 0, 2, 3]);
        assert_eq!(c.members(1), &[0, 2]);
        assert!(Clustering::from_mapping(vec![0, 0, 0], 2).is_err());
        assert!(Clustering::from_mapping(vec![0, 2], 2).is_err());
        let g = Clustering::from_groups(&[vec![3, 1], vec![0, 2]], 4, 2).unwrap();
        assert_eq!(g.node_mapping(), &[1, 0, 1, 0]);
        assert!(Clustering::from_groups(&[vec![0], vec![0, 1]], 2, 2).is_err());
    }

    #[test]
    fn from_parts_rejects_inconsistent_order() {
        let c = Clustering::from_mapping(vec![0, 1, 0], 2).unwrap();
        let ok = Clustering::from_parts(
            c.node_mapping().to_vec(),
            vec![2, 0, 1],
            c.cluster_offset().to_vec(),
            2,
        )
        .unwrap();
        assert_eq!(ok.node_order(), &[2, 0, 1]);
        assert!(Clustering::from_parts(
            c.node_mapping().to_vec(),
            vec![0, 1, 2],
            c.cluster_offset().to_vec(),
            2
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn combiner_chain(ws in prop::collection::vec(0.01f64..100.0, 1..20)) {
            let is = combine_edge_weights(&ws, EdgeCombiner::InverseSum).unwrap();
            let hm = combine_edge_weights(&ws, EdgeCombiner::HarmonicMean).unwrap();
            let mn = combine_edge_weights(&ws, EdgeCombiner::Min).unwrap();
            let s = ws.len() as f64;
            prop_assert!(((hm - s * is) / hm).abs() <= 1e-9);
            prop_assert!(is <= mn * (1.0 + 1e-12));
            prop_assert!(mn <= hm * (1.0 + 1e-12));
        }
    }
}
