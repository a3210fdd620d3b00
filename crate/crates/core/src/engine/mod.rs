//! Two-phase query execution over an opened [`Store`].
//!
//! Phase 1 searches the cluster-level graph for artificial answers. Their
//! clusters, plus optional extras, are loaded from disk and phase 2 searches
//! the resulting node-level subgraph. When consecutive phase-2 scores drop
//! sharply, more clusters are fetched and phase 2 runs again.

mod compare;
mod dataset;
mod synth;

pub use compare::{compare_precision, ComparisonReport, QueryComparison};
pub use dataset::{load_dataset, Dataset};
pub use synth::{generate_synthetic, PlantedTerm, SynthSpec};

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clustering::ClusterId;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::index::KeywordIndex;
use crate::scoring::{sort_ranked, ScoredAnswer};
use crate::search::{search, Algorithm, KeywordSets, SearchConfig, SearchStats};
use crate::storage::{expand_cluster_files, ClusterFile, Store};

/// Which clusters beyond the phase-1 answers may be loaded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ExtraClusterPolicy {
    None,
    /// Every unexpanded cluster holding a query term, in id order, while it fits.
    #[default]
    KeywordClusters,
    /// Like `KeywordClusters`, but in seeded random order when not all fit.
    KeywordClustersRandomFill,
}

impl FromStr for ExtraClusterPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "keyword" | "keyword-clusters" => Ok(Self::KeywordClusters),
            "random-fill" | "keyword-clusters-random-fill" => Ok(Self::KeywordClustersRandomFill),
            _ => Err(Error::Config(format!("unknown extra-cluster policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Artificial answers collected in phase 1.
    pub phase1_limit: usize,
    pub phase1_algorithm: Algorithm,
    pub phase2_algorithm: Algorithm,
    pub gamma: f64,
    /// Bytes allowed beyond the clusters of phase-1 answers.
    pub memory_budget_bytes: u64,
    pub extra_policy: ExtraClusterPolicy,
    pub seed: u64,
    pub max_refetch: usize,
    /// Phase-2 search settings; phase 1 uses them with `k = phase1_limit`.
    pub search: SearchConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            phase1_limit: 100,
            phase1_algorithm: Algorithm::Backward,
            phase2_algorithm: Algorithm::Bidirectional,
            gamma: 0.5,
            memory_budget_bytes: 0,
            extra_policy: ExtraClusterPolicy::default(),
            seed: 0,
            max_refetch: 8,
            search: SearchConfig::default(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma {} not in (0,1]", self.gamma)));
        }
        if self.phase1_limit == 0 {
            return Err(Error::Config("phase-1 limit must be at least 1".into()));
        }
        self.search.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResult {
    /// Ranked answers over global node ids.
    pub answers: Vec<ScoredAnswer>,
    pub stats: SearchStats,
    /// Clusters of the phase-1 answers.
    pub core_cluster_ids: Vec<ClusterId>,
    pub expanded_cluster_ids: Vec<ClusterId>,
    pub refetch_events: usize,
    pub phase1_answers: usize,
    pub clusters_read: u64,
    /// Text of every node appearing in an answer.
    pub node_text: BTreeMap<NodeId, String>,
}

/// True when some score is at most `gamma` times its predecessor.
pub fn gamma_trigger(scores: &[f64], gamma: f64) -> bool {
    scores.windows(2).any(|w| w[1] <= gamma * w[0])
}

/// Unexpanded keyword clusters chosen under `policy` whose estimated bytes
/// together stay within `budget`.
pub fn select_extra_clusters(
    store: &Store,
    keyword_clusters: &BTreeSet<ClusterId>,
    already_expanded: &BTreeSet<ClusterId>,
    budget: u64,
    policy: ExtraClusterPolicy,
    rng: &mut ChaCha8Rng,
) -> Vec<ClusterId> {
    let mut candidates: Vec<ClusterId> = keyword_clusters
        .difference(already_expanded)
        .copied()
        .collect();
    let total: u64 = candidates.iter().map(|&c| store.cluster_bytes(c)).sum();
    match policy {
        ExtraClusterPolicy::None => return Vec::new(),
        ExtraClusterPolicy::KeywordClusters => {}
        ExtraClusterPolicy::KeywordClustersRandomFill => {
            if total > budget {
                candidates.shuffle(rng);
            }
        }
    }
    let mut chosen = fit_within(store, candidates, budget);
    chosen.sort_unstable();
    chosen
}

fn fit_within(store: &Store, candidates: impl IntoIterator<Item = ClusterId>, budget: u64) -> Vec<ClusterId> {
    let mut left = budget;
    let mut chosen = Vec::new();
    for c in candidates {
        let b = store.cluster_bytes(c);
        if b <= left {
            left -= b;
            chosen.push(c);
        }
    }
    chosen
}

/// Clusters to add after a score drop: unexpanded keyword clusters first,
/// then clusters adjacent to the expanded ones, both in id order.
fn refetch_candidates(
    store: &Store,
    keyword_clusters: &BTreeSet<ClusterId>,
    expanded: &BTreeSet<ClusterId>,
    budget: u64,
) -> Vec<ClusterId> {
    let cg = &store.compressed().cluster_graph.graph;
    let adjacent: BTreeSet<ClusterId> = expanded
        .iter()
        .flat_map(|&c| cg.out_edges(c).map(|s| s.target))
        .filter(|c| !expanded.contains(c) && !keyword_clusters.contains(c))
        .collect();
    let order = keyword_clusters
        .difference(expanded)
        .copied()
        .chain(adjacent);
    fit_within(store, order, budget)
}

fn index_of(store: &Store) -> Result<&KeywordIndex> {
    store
        .index()
        .ok_or_else(|| Error::Config(format!("{} has no keyword index", store.dir().display())))
}

/// Runs one query end to end. See the module documentation for the phases.
pub fn two_phase_query<S: AsRef<str>>(store: &Store, terms: &[S], cfg: &EngineConfig) -> Result<QueryResult> {
    cfg.validate()?;
    let reads_before = store.cluster_reads();
    let index = index_of(store)?;
    let cg = store.compressed();
    let projected;
    let cluster_index = match &cg.cluster_index {
        Some(ci) => ci,
        None => {
            projected = index.project_to_clusters(&cg.clustering);
            &projected
        }
    };
    let cluster_sets = KeywordSets::from_terms(cluster_index.as_index(), terms)?;

    let phase1_cfg = SearchConfig {
        k: cfg.phase1_limit,
        ..cfg.search
    };
    let phase1 = search(cfg.phase1_algorithm, &cg.cluster_graph.graph, &cluster_sets, &phase1_cfg)?;
    let mut stats = phase1.stats;
    let core: BTreeSet<ClusterId> = phase1
        .answers
        .iter()
        .flat_map(|a| a.tree.nodes().iter().copied())
        .collect();
    let keyword_clusters: BTreeSet<ClusterId> = cluster_sets.union().into_iter().collect();

    let mut result = QueryResult {
        answers: Vec::new(),
        stats,
        core_cluster_ids: core.iter().copied().collect(),
        expanded_cluster_ids: Vec::new(),
        refetch_events: 0,
        phase1_answers: phase1.answers.len(),
        clusters_read: 0,
        node_text: BTreeMap::new(),
    };
    if core.is_empty() {
        return Ok(result);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut expanded = core.clone();
    let extras = select_extra_clusters(
        store,
        &keyword_clusters,
        &expanded,
        cfg.memory_budget_bytes,
        cfg.extra_policy,
        &mut rng,
    );
    let mut spent: u64 = extras.iter().map(|&c| store.cluster_bytes(c)).sum();
    expanded.extend(extras);

    let mut loaded: BTreeMap<ClusterId, ClusterFile> = BTreeMap::new();
    loop {
        for &c in &expanded {
            if !loaded.contains_key(&c) {
                loaded.insert(c, store.read_cluster(c)?);
            }
        }
        let files: Vec<ClusterFile> = loaded.values().cloned().collect();
        let eg = expand_cluster_files(&files)?;
        let sets: Vec<Vec<NodeId>> = terms
            .iter()
            .map(|t| {
                index
                    .lookup(t.as_ref())
                    .iter()
                    .filter_map(|&v| eg.to_local(v))
                    .collect()
            })
            .collect();
        if sets.iter().any(Vec::is_empty) {
            result.answers.clear();
            break;
        }
        let ks = KeywordSets::new(sets)?;
        let phase2 = search(cfg.phase2_algorithm, &eg.graph, &ks, &cfg.search)?;
        stats += phase2.stats;
        result.answers = phase2
            .answers
            .iter()
            .map(|a| a.relabel(|l| eg.to_global(l)))
            .collect();
        sort_ranked(&mut result.answers);
        for a in &result.answers {
            for &v in a.tree.nodes() {
                let local = eg.to_local(v).expect("answer node was expanded");
                result
                    .node_text
                    .entry(v)
                    .or_insert_with(|| eg.texts[local as usize].clone());
            }
        }

        let scores: Vec<f64> = result.answers.iter().map(|a| a.score).collect();
        if result.refetch_events >= cfg.max_refetch || !gamma_trigger(&scores, cfg.gamma) {
            break;
        }
        let left = cfg.memory_budget_bytes - spent;
        let fetch = refetch_candidates(store, &keyword_clusters, &expanded, left);
        if fetch.is_empty() {
            break;
        }
        spent += fetch.iter().map(|&c| store.cluster_bytes(c)).sum::<u64>();
        expanded.extend(fetch);
        result.refetch_events += 1;
        result.node_text.clear();
    }

    result.stats = stats;
    result.expanded_cluster_ids = expanded.into_iter().collect();
    result.clusters_read = store.cluster_reads() - reads_before;
    Ok(result)
}
