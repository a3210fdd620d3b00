//! On-disk store: one compressed cluster-level graph, one file per cluster and
//! an optional keyword index.
//!
//! ```text
//! <dir>/graph.emb            compressed graph, clustering and metadata
//! <dir>/clusters/NNNN.clu    node-level contents of cluster NNNN
//! <dir>/index.kwi            term -> node postings
//! <dir>/nodes.dg             node-level graph written by ingestion
//! ```
//!
//! Every file starts with a four-byte magic and a u16 version, is
//! little-endian throughout and ends with a CRC32 of everything before it.

mod cluster_file;
mod codec;
mod graph_file;
mod index_file;
mod node_file;

pub use cluster_file::{
    cluster_path, read_cluster, BoundaryEdge, ClusterFile, ClusterWriter, CLUSTER_MAGIC,
    CLUSTER_VERSION,
};
pub use graph_file::{
    encode_compressed_graph, read_compressed_graph, write_compressed_graph, CompressedGraph,
    GRAPH_MAGIC, GRAPH_VERSION,
};
pub use index_file::{read_index, write_index, INDEX_MAGIC, INDEX_VERSION};
pub use node_file::{read_nodes, write_nodes, NODES_MAGIC, NODES_VERSION};

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::clustering::{
    build_cluster_graph, compute_cluster_metadata, ClusterId, Clustering, WeightConfig,
};
use crate::error::{Error, Result};
use crate::graph::{
    estimate_memory, DataGraph, DirectionBits, GraphParts, NodeId, NodeMeta,
};
use crate::index::KeywordIndex;

pub const GRAPH_FILE: &str = "graph.emb";
pub const INDEX_FILE: &str = "index.kwi";
pub const NODES_FILE: &str = "nodes.dg";

/// Options for [`build_store`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    pub weights: WeightConfig,
    /// Store per-cluster entry/exit cost tables besides the overall minimum.
    pub in_out_table: bool,
}

/// Writes `graph.emb`, every cluster file and `index.kwi` into `dir`,
/// replacing any clusters left from an earlier build.
pub fn build_store(
    dir: &Path,
    g: &DataGraph,
    meta: &NodeMeta,
    index: &KeywordIndex,
    clustering: &Clustering,
    options: BuildOptions,
) -> Result<CompressedGraph> {
    if clustering.node_count() != g.node_count() || meta.len() != g.node_count() {
        return Err(Error::InvalidClustering(format!(
            "clustering covers {} nodes, graph has {}, metadata {}",
            clustering.node_count(),
            g.node_count(),
            meta.len()
        )));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let clusters = dir.join("clusters");
    if clusters.exists() {
        std::fs::remove_dir_all(&clusters).map_err(|e| Error::io(&clusters, e))?;
    }
    let cluster_graph = build_cluster_graph(g, clustering, options.weights)?;
    let metadata = compute_cluster_metadata(g, clustering, options.in_out_table);
    let cluster_slots = (0..clustering.k() as ClusterId)
        .map(|c| {
            clustering
                .members(c)
                .iter()
                .map(|&m| g.slot_range(m).len() as u32)
                .sum()
        })
        .collect();
    let cg = CompressedGraph {
        cluster_graph,
        clustering: clustering.clone(),
        metadata,
        cluster_slots,
        cluster_index: Some(index.project_to_clusters(clustering)),
    };
    let mut writer = ClusterWriter::new(dir)?;
    for c in 0..clustering.k() as ClusterId {
        writer.write(&ClusterFile::build(g, meta, clustering, c))?;
    }
    write_index(index, &dir.join(INDEX_FILE))?;
    write_compressed_graph(&cg, &dir.join(GRAPH_FILE))?;
    Ok(cg)
}

/// Node-level subgraph loaded from a set of clusters. Local ids follow
/// ascending global id, so `local_to_global` is strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedGraph {
    pub graph: DataGraph,
    pub local_to_global: Vec<NodeId>,
    pub texts: Vec<String>,
    pub clusters: Vec<ClusterId>,
}

impl ExpandedGraph {
    pub fn to_local(&self, global: NodeId) -> Option<NodeId> {
        self.local_to_global
            .binary_search(&global)
            .ok()
            .map(|i| i as NodeId)
    }

    pub fn to_global(&self, local: NodeId) -> NodeId {
        self.local_to_global[local as usize]
    }
}

/// Builds the subgraph induced by the members of `files`. A slot survives when
/// both of its endpoints were loaded; each node's slots keep their original order.
pub fn expand_cluster_files(files: &[ClusterFile]) -> Result<ExpandedGraph> {
    let mut files: Vec<&ClusterFile> = files.iter().collect();
    files.sort_by_key(|f| f.id);
    files.dedup_by_key(|f| f.id);
    let loaded: BTreeSet<ClusterId> = files.iter().map(|f| f.id).collect();

    // (global id, file index, local index within file)
    let mut nodes: Vec<(NodeId, usize, usize)> = files
        .iter()
        .enumerate()
        .flat_map(|(fi, f)| f.members.iter().enumerate().map(move |(li, &m)| (m, fi, li)))
        .collect();
    nodes.sort_unstable();
    if nodes.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidClustering(
            "a node belongs to two loaded clusters".into(),
        ));
    }
    let local_to_global: Vec<NodeId> = nodes.iter().map(|n| n.0).collect();
    let to_local = |g: NodeId| -> Result<NodeId> {
        local_to_global
            .binary_search(&g)
            .map(|i| i as NodeId)
            .map_err(|_| Error::InvalidClustering(format!("boundary target {g} was not loaded")))
    };

    // boundary slots grouped by source, in file order
    let boundary_start: Vec<Vec<usize>> = files
        .iter()
        .map(|f| {
            let mut starts = vec![0; f.members.len() + 1];
            for b in &f.boundary {
                starts[b.source as usize + 1] += 1;
            }
            for i in 0..f.members.len() {
                starts[i + 1] += starts[i];
            }
            starts
        })
        .collect();
    for (f, starts) in files.iter().zip(&boundary_start) {
        if f.boundary.windows(2).any(|w| w[0].source > w[1].source) {
            return Err(Error::InvalidClustering(format!(
                "cluster {} boundary edges not grouped by source",
                f.id
            )));
        }
        debug_assert_eq!(starts[f.members.len()], f.boundary.len());
    }

    let mut parts = GraphParts {
        offsets: vec![0],
        ..GraphParts::default()
    };
    let mut dirs = Vec::new();
    let mut texts = Vec::with_capacity(nodes.len());
    for &(_, fi, li) in &nodes {
        let f = files[fi];
        parts.prestige.push(f.prestige[li]);
        parts.node_type.push(f.node_type[li]);
        texts.push(f.texts[li].clone());
        let mut slots = Vec::new();
        for s in f.intra_offsets[li] as usize..f.intra_offsets[li + 1] as usize {
            let target = f.members[f.intra_target[s] as usize];
            slots.push((
                f.intra_position[s],
                target,
                f.intra_weight[s],
                f.intra_priority[s],
                f.intra_direction.get(s),
            ));
        }
        let starts = &boundary_start[fi];
        for b in &f.boundary[starts[li]..starts[li + 1]] {
            if loaded.contains(&b.target_cluster) {
                slots.push((b.position, b.target, b.weight, b.priority, b.direction));
            }
        }
        slots.sort_by_key(|s| s.0);
        for (_, target, weight, priority, direction) in slots {
            parts.adjacent.push(to_local(target)?);
            parts.weight.push(weight);
            parts.priority.push(priority);
            dirs.push(direction);
        }
        parts.offsets.push(parts.adjacent.len() as u32);
    }
    parts.direction = DirectionBits::with_len(dirs.len());
    for (i, d) in dirs.into_iter().enumerate() {
        parts.direction.set(i, d);
    }
    Ok(ExpandedGraph {
        graph: DataGraph::from_parts(parts)?,
        local_to_global,
        texts,
        clusters: loaded.into_iter().collect(),
    })
}

/// An opened store. Cluster files are read on demand; the read count is kept
/// for statistics.
#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    compressed: CompressedGraph,
    index: Option<KeywordIndex>,
    reads: AtomicU64,
}

impl Store {
    pub fn open(dir: &Path) -> Result<Self> {
        let compressed = read_compressed_graph(&dir.join(GRAPH_FILE))?;
        let index_path = dir.join(INDEX_FILE);
        let index = if index_path.exists() {
            Some(read_index(&index_path)?)
        } else {
            None
        };
        Ok(Self {
            dir: dir.to_path_buf(),
            compressed,
            index,
            reads: AtomicU64::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn compressed(&self) -> &CompressedGraph {
        &self.compressed
    }

    pub fn clustering(&self) -> &Clustering {
        &self.compressed.clustering
    }

    pub fn index(&self) -> Option<&KeywordIndex> {
        self.index.as_ref()
    }

    pub fn cluster_count(&self) -> usize {
        self.compressed.clustering.k()
    }

    pub fn cluster_reads(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    /// Estimated in-memory bytes of cluster `c` once expanded.
    pub fn cluster_bytes(&self, c: ClusterId) -> u64 {
        estimate_memory(
            self.compressed.clustering.size(c) as u64,
            self.compressed.cluster_slots[c as usize] as u64,
        )
        .bytes
    }

    pub fn read_cluster(&self, id: ClusterId) -> Result<ClusterFile> {
        if id as usize >= self.cluster_count() {
            return Err(Error::Config(format!(
                "cluster {id} out of range (store has {})",
                self.cluster_count()
            )));
        }
        let f = read_cluster(id, &self.dir)?;
        self.reads.fetch_add(1, Ordering::Relaxed);
        Ok(f)
    }

    pub fn expand_clusters(&self, ids: &[ClusterId]) -> Result<ExpandedGraph> {
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let files = ids
            .iter()
            .map(|&c| self.read_cluster(c))
            .collect::<Result<Vec<_>>>()?;
        expand_cluster_files(&files)
    }
}

pub fn expand_clusters(ids: &[ClusterId], store: &Store) -> Result<ExpandedGraph> {
    store.expand_clusters(ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{cluster, ClusterAlgorithm};
    use crate::graph::GraphBuilder;
    use crate::index::IndexOptions;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(seed: u64, n: usize, links: usize) -> (DataGraph, NodeMeta) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prestige = (0..n).map(|_| rng.gen_range(0.0..4.0)).collect();
        let mut b = GraphBuilder::with_nodes(prestige, vec![0; n]);
        for _ in 0..links {
            let u = rng.gen_range(0..n) as NodeId;
            let v = rng.gen_range(0..n) as NodeId;
            if u != v {
                b.add_link(u, v, rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0), 1.0);
            }
        }
        let meta = NodeMeta {
            tables: vec!["t".into()],
            keys: (0..n).map(|i| i.to_string()).collect(),
            texts: (0..n).map(|i| format!("node w{}", i % 7)).collect(),
        };
        (b.build().unwrap(), meta)
    }

    fn store_for(seed: u64, n: usize, size: usize) -> (tempfile::TempDir, DataGraph, Store) {
        let (g, meta) = random_graph(seed, n, n * 2);
        let c = cluster(&g, ClusterAlgorithm::GreedyMinimum, size, seed).unwrap();
        let idx = KeywordIndex::build(&meta, g.node_types(), IndexOptions::default());
        let dir = tempfile::tempdir().unwrap();
        build_store(dir.path(), &g, &meta, &idx, &c, BuildOptions::default()).unwrap();
        let store = Store::open(dir.path()).unwrap();
        (dir, g, store)
    }

    #[test]
    fn cluster_file_name_is_zero_padded() {
        assert!(cluster_path(Path::new("s"), 7).ends_with("clusters/0007.clu"));
        assert!(cluster_path(Path::new("s"), 12345).ends_with("clusters/12345.clu"));
    }

    #[test]
    fn out_of_order_write_is_rejected() {
        let (g, meta) = random_graph(1, 10, 15);
        let c = Clustering::identity(10);
        let dir = tempfile::tempdir().unwrap();
        let mut w = ClusterWriter::new(dir.path()).unwrap();
        w.write(&ClusterFile::build(&g, &meta, &c, 5)).unwrap();
        let err = w.write(&ClusterFile::build(&g, &meta, &c, 3)).unwrap_err();
        assert!(matches!(err, Error::OutOfOrderWrite { id: 3, previous: 5 }));
    }

    #[test]
    fn cluster_round_trip_and_singletons() {
        let (g, meta) = random_graph(2, 30, 50);
        let c = Clustering::identity(30);
        let dir = tempfile::tempdir().unwrap();
        let mut w = ClusterWriter::new(dir.path()).unwrap();
        for id in 0..30 {
            let f = ClusterFile::build(&g, &meta, &c, id);
            assert_eq!(f.intra_slot_count(), 0);
            w.write(&f).unwrap();
            assert_eq!(read_cluster(id, dir.path()).unwrap(), f);
        }
        assert!(matches!(read_cluster(30, dir.path()), Err(Error::Io { .. })));
    }

    #[test]
    fn compressed_graph_round_trip() {
        let (dir, _, store) = store_for(3, 120, 10);
        let path = dir.path().join(GRAPH_FILE);
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(encode_compressed_graph(store.compressed()), bytes);

        let mut bad = bytes.clone();
        bad[20] ^= 0x40;
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(read_compressed_graph(&path), Err(Error::Checksum { .. })));

        let mut old = bytes;
        old[4] = 9;
        std::fs::write(&path, &old).unwrap();
        assert!(matches!(read_compressed_graph(&path), Err(Error::VersionMismatch { .. })));
    }

    #[test]
    fn empty_graph_file_has_fixed_size() {
        let dir = tempfile::tempdir().unwrap();
        let g = DataGraph::empty();
        let meta = NodeMeta::default();
        let c = Clustering::from_mapping(Vec::new(), 10).unwrap();
        let cg = build_store(dir.path(), &g, &meta, &KeywordIndex::default(), &c, BuildOptions::default())
            .unwrap();
        let len = std::fs::metadata(dir.path().join(GRAPH_FILE)).unwrap().len();
        // magic, version, flags, 4 counts, 1 offset, 1 cluster offset,
        // empty index (3 counts + 2 offsets), crc
        assert_eq!(len, 4 + 2 + 2 + 16 + 4 + 4 + 20 + 4);
        assert_eq!(read_compressed_graph(&dir.path().join(GRAPH_FILE)).unwrap(), cg);
    }

    #[test]
    fn expanding_everything_reproduces_the_graph() {
        for seed in 0..5 {
            let (_dir, g, store) = store_for(seed, 150, 12);
            let all: Vec<ClusterId> = (0..store.cluster_count() as ClusterId).collect();
            let e = store.expand_clusters(&all).unwrap();
            assert_eq!(e.local_to_global, (0..150).collect::<Vec<_>>());
            assert_eq!(e.graph, g);
            assert_eq!(store.cluster_reads(), all.len() as u64);
        }
    }

    #[test]
    fn expansion_matches_induced_subgraph() {
        let (_dir, g, store) = store_for(9, 100, 8);
        let ids: Vec<ClusterId> = (0..store.cluster_count() as ClusterId).step_by(3).collect();
        let e = store.expand_clusters(&ids).unwrap();
        let clustering = store.clustering();
        let keep = |v: NodeId| ids.contains(&clustering.cluster_of(v));
        let expected: Vec<NodeId> = (0..100).filter(|&v| keep(v)).collect();
        assert_eq!(e.local_to_global, expected);
        for (l, &v) in e.local_to_global.iter().enumerate() {
            let want: Vec<(NodeId, f32)> = g
                .out_edges(v)
                .filter(|s| keep(s.target))
                .map(|s| (s.target, s.weight))
                .collect();
            let got: Vec<(NodeId, f32)> = e
                .graph
                .out_edges(l as NodeId)
                .map(|s| (e.to_global(s.target), s.weight))
                .collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn nodes_file_round_trip() {
        let (g, meta) = random_graph(4, 40, 60);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(NODES_FILE);
        write_nodes(&g, &meta, &p).unwrap();
        assert_eq!(read_nodes(&p).unwrap(), (g, meta));
    }
}
