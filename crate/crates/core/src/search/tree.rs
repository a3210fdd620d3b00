use std::collections::BTreeMap;

use crate::graph::NodeId;
use crate::scoring::{AnswerTree, TreeEdge};

/// Builds the answer rooted at `root` by following, for each keyword `i`,
/// the path given by `step(i, node)` until it returns `None` (the keyword
/// node). Edges into nodes already in the tree are skipped; the walk
/// continues from the existing node. Non-keyword leaves left dangling by
/// those skips are trimmed.
pub(crate) fn assemble(
    root: NodeId,
    keywords: usize,
    max_steps: usize,
    mut step: impl FnMut(usize, NodeId) -> Option<(NodeId, f64)>,
) -> Option<AnswerTree> {
    let mut parent: BTreeMap<NodeId, (NodeId, f64)> = BTreeMap::new();
    let mut targets = Vec::with_capacity(keywords);
    for i in 0..keywords {
        let mut x = root;
        let mut steps = 0;
        while let Some((y, w)) = step(i, x) {
            if y != root && !parent.contains_key(&y) {
                parent.insert(y, (x, w));
            }
            x = y;
            steps += 1;
            if steps > max_steps {
                return None;
            }
        }
        targets.push(x);
    }

    loop {
        let with_children: Vec<NodeId> = parent.values().map(|&(p, _)| p).collect();
        let dangling: Vec<NodeId> = parent
            .keys()
            .copied()
            .filter(|n| !with_children.contains(n) && !targets.contains(n))
            .collect();
        if dangling.is_empty() {
            break;
        }
        for n in dangling {
            parent.remove(&n);
        }
    }

    let edges = parent
        .into_iter()
        .map(|(child, (parent, weight))| TreeEdge {
            parent,
            child,
            weight,
        })
        .collect();
    AnswerTree::new(root, edges, targets).ok()
}
