//! Inverted keyword index from normalized terms to sorted node ids.

use std::collections::BTreeMap;

use crate::clustering::{ClusterId, Clustering};
use crate::graph::{NodeId, NodeMeta};

/// Lowercased maximal alphanumeric runs.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

/// Normalizes a single query term the same way node text is tokenized.
pub fn normalize_term(term: &str) -> String {
    tokenize(term).collect::<Vec<_>>().join("")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IndexOptions {
    /// Index every tuple under the (lowercased) name of its relation.
    pub relation_names: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeywordIndex {
    postings: BTreeMap<String, Vec<NodeId>>,
}

impl KeywordIndex {
    pub fn build(meta: &NodeMeta, node_types: &[u16], options: IndexOptions) -> Self {
        let mut postings: BTreeMap<String, Vec<NodeId>> = BTreeMap::new();
        for (n, text) in meta.texts.iter().enumerate() {
            for term in tokenize(text) {
                postings.entry(term).or_default().push(n as NodeId);
            }
            if options.relation_names {
                if let Some(table) = node_types.get(n).and_then(|&t| meta.tables.get(t as usize)) {
                    for term in tokenize(table) {
                        postings.entry(term).or_default().push(n as NodeId);
                    }
                }
            }
        }
        // nodes are visited in id order, so only adjacent duplicates can occur
        for list in postings.values_mut() {
            list.dedup();
        }
        Self { postings }
    }

    /// Builds from pre-sorted postings; lists are sorted and deduplicated.
    pub fn from_postings(postings: BTreeMap<String, Vec<NodeId>>) -> Self {
        let postings = postings
            .into_iter()
            .map(|(t, mut l)| {
                l.sort_unstable();
                l.dedup();
                (t, l)
            })
            .collect();
        Self { postings }
    }

    pub fn lookup(&self, term: &str) -> &[NodeId] {
        self.postings
            .get(&normalize_term(term))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &[NodeId])> {
        self.postings.iter().map(|(t, l)| (t.as_str(), l.as_slice()))
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn project_to_clusters(&self, clustering: &Clustering) -> ClusterKeywordIndex {
        let map = clustering.node_mapping();
        let postings = self
            .postings
            .iter()
            .map(|(t, nodes)| {
                let mut cl: Vec<ClusterId> = nodes.iter().map(|&n| map[n as usize]).collect();
                cl.sort_unstable();
                cl.dedup();
                (t.clone(), cl)
            })
            .collect();
        ClusterKeywordIndex(KeywordIndex { postings })
    }
}

/// Term -> sorted cluster ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterKeywordIndex(pub KeywordIndex);

impl ClusterKeywordIndex {
    pub fn lookup(&self, term: &str) -> &[ClusterId] {
        self.0.lookup(term)
    }

    pub fn as_index(&self) -> &KeywordIndex {
        &self.0
    }
}
