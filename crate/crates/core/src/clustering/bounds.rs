use super::{ClusterGraph, ClusterMetadata};
use crate::error::{Error, Result};
use crate::scoring::AnswerTree;

/// Lower and upper bounds on the cost of realizing a cluster-level answer
/// with member nodes.
///
/// Lower: every intermediate cluster (neither root nor holding a keyword)
/// must be crossed from its parent side to a child side.
///
/// Upper: each superedge is crossed by its cheapest member edge, and inside
/// each cluster every terminal (child exit or keyword node) is reached from
/// the entry node within the cluster diameter. A root cluster holding a
/// keyword roots the tree at that keyword node.
pub fn answer_cost_bounds(answer: &AnswerTree, cg: &ClusterGraph, meta: &ClusterMetadata) -> Result<(f64, f64)> {
    for &c in answer.nodes() {
        if c as usize >= meta.len() {
            return Err(Error::MissingMetadata(c));
        }
    }
    let kw = answer.keyword_nodes();
    let mut lower = 0.0;
    let mut upper = 0.0;
    for e in answer.edges() {
        let s = cg.superedge_slot(e.parent, e.child).ok_or_else(|| {
            Error::InvalidGraph(format!("no superedge {} -> {}", e.parent, e.child))
        })?;
        upper += cg.crossing_min[s] as f64;
    }
    for &c in answer.nodes() {
        let children: Vec<_> = answer.edges().iter().filter(|e| e.parent == c).map(|e| e.child).collect();
        let groups = kw.iter().filter(|&&k| k == c).count();
        let mut terminals = children.len() + groups;
        if c == answer.root() && groups > 0 {
            terminals -= 1;
        }
        upper += terminals as f64 * meta.diameter[c as usize];

        if c != answer.root() && groups == 0 {
            let parent = answer
                .edges()
                .iter()
                .find(|e| e.child == c)
                .map(|e| e.parent)
                .expect("non-root tree node has a parent");
            let through = match meta.in_out_table {
                Some(_) => children
                    .iter()
                    .filter_map(|&ch| meta.in_out(c, parent, ch))
                    .fold(f64::INFINITY, f64::min),
                None => meta.min_in_out[c as usize],
            };
            lower += if through.is_finite() { through } else { meta.min_in_out[c as usize] };
        }
    }
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{build_cluster_graph, compute_cluster_metadata, Clustering, WeightConfig};
    use crate::graph::GraphBuilder;
    use crate::scoring::TreeEdge;

    fn edge(p: u32, c: u32, w: f64) -> TreeEdge {
        TreeEdge {
            parent: p,
            child: c,
            weight: w,
        }
    }

    #[test]
    fn two_keyword_clusters_one_superedge() {
        // cluster 0 = {0, 1}, cluster 1 = {2, 3}; crossing edge 1 -> 2 weight 2
        let mut b = GraphBuilder::with_nodes(vec![1.0; 4], vec![0; 4]);
        b.add_link(0, 1, 1.0, 1.0, 1.0);
        b.add_link(1, 2, 2.0, 2.0, 1.0);
        b.add_link(2, 3, 3.0, 3.0, 1.0);
        let g = b.build().unwrap();
        let c = Clustering::from_mapping(vec![0, 0, 1, 1], 2).unwrap();
        let cg = build_cluster_graph(&g, &c, WeightConfig::default()).unwrap();
        let meta = compute_cluster_metadata(&g, &c, false);
        let t = AnswerTree::new(0, vec![edge(0, 1, 2.0)], vec![0, 1]).unwrap();
        let (lo, hi) = answer_cost_bounds(&t, &cg, &meta).unwrap();
        assert_eq!(lo, 0.0);
        // the root starts at its keyword node and still has to reach the exit
        assert_eq!(hi, 2.0 + meta.diameter[0] + meta.diameter[1]);
    }

    #[test]
    fn singleton_clusters_give_exact_cost() {
        let mut b = GraphBuilder::with_nodes(vec![1.0; 3], vec![0; 3]);
        b.add_link(0, 1, 1.5, 1.0, 1.0);
        b.add_link(1, 2, 2.5, 1.0, 1.0);
        let g = b.build().unwrap();
        let c = Clustering::identity(3);
        let cg = build_cluster_graph(&g, &c, WeightConfig::default()).unwrap();
        let meta = compute_cluster_metadata(&g, &c, false);
        let t = AnswerTree::new(1, vec![edge(1, 0, 1.0), edge(1, 2, 2.5)], vec![0, 2]).unwrap();
        let (lo, hi) = answer_cost_bounds(&t, &cg, &meta).unwrap();
        assert_eq!((lo, hi), (0.0, 3.5));
    }

    #[test]
    fn missing_metadata_is_an_error() {
        let g = GraphBuilder::with_nodes(vec![1.0; 2], vec![0; 2]).build().unwrap();
        let c = Clustering::identity(2);
        let cg = build_cluster_graph(&g, &c, WeightConfig::default()).unwrap();
        let t = AnswerTree::single(1, 1);
        let meta = ClusterMetadata {
            diameter: vec![0.0],
            min_in_out: vec![0.0],
            in_out_table: None,
        };
        assert!(matches!(answer_cost_bounds(&t, &cg, &meta), Err(Error::MissingMetadata(1))));
    }
}
