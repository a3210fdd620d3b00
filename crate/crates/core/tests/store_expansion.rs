mod common;

use common::*;
use embanks::clustering::{cluster_greedy_minimum, ClusterId};
use embanks::graph::NodeId;
use embanks::storage::Store;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn expanding_any_cluster_subset_yields_the_induced_subgraph() {
    for seed in 0..12 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let n = rng.gen_range(10..=120);
        let rg = RandomGraph::generate(&mut rng, n, 2 * n, false);
        let g = rg.build();
        let clustering = cluster_greedy_minimum(&g, rng.gen_range(2..=12), seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let store = make_store(dir.path(), &g, &keyword_meta(n, &[]), &clustering);

        let mut ids: Vec<ClusterId> = (0..clustering.k() as ClusterId).collect();
        ids.shuffle(&mut rng);
        ids.truncate(rng.gen_range(1..=ids.len()));
        let x = store.expand_clusters(&ids).unwrap();

        let mut keep: Vec<NodeId> = (0..n as NodeId)
            .filter(|&u| ids.contains(&clustering.cluster_of(u)))
            .collect();
        keep.sort_unstable();
        assert_eq!(x.local_to_global, keep, "seed {seed}");
        let got: Vec<Vec<(NodeId, f32)>> = (0..keep.len() as NodeId)
            .map(|u| x.graph.out_edges(u).map(|s| (s.target, s.weight)).collect())
            .collect();
        assert_eq!(got, induced_slots(&g, &keep), "seed {seed}");
        for (local, &global) in keep.iter().enumerate() {
            assert_eq!(x.texts[local], format!("node{global}"));
        }
    }
}

#[test]
fn reopened_store_reports_the_same_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rg = RandomGraph::generate(&mut rng, 60, 90, true);
    let g = rg.build();
    let clustering = cluster_greedy_minimum(&g, 8, 7).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let first = make_store(dir.path(), &g, &keyword_meta(60, &[]), &clustering);
    let again = Store::open(dir.path()).unwrap();
    assert_eq!(first.compressed(), again.compressed());
    assert_eq!(again.cluster_count(), clustering.k());
    let bytes: u64 = (0..clustering.k() as ClusterId).map(|c| again.cluster_bytes(c)).sum();
    assert!(bytes > 0);
}

#[test]
fn a_truncated_cluster_file_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rg = RandomGraph::generate(&mut rng, 20, 30, true);
    let g = rg.build();
    let clustering = cluster_greedy_minimum(&g, 5, 8).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let store = make_store(dir.path(), &g, &keyword_meta(20, &[]), &clustering);
    let path = embanks::storage::cluster_path(dir.path(), 0);
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    assert!(store.read_cluster(0).is_err());
}
