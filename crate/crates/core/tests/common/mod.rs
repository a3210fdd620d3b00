//! Test-side generators and reference solvers shared by the integration
//! suites. Nothing here calls into the search or bounds code it is used to
//! check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;
use std::path::Path;

use embanks::clustering::Clustering;
use embanks::graph::{DataGraph, GraphBuilder, NodeId, NodeMeta};
use embanks::index::{IndexOptions, KeywordIndex};
use embanks::scoring::AnswerTree;
use embanks::storage::{build_store, BuildOptions, Store};
use rand::seq::SliceRandom;
use rand::Rng;

/// Links as given to the builder: `(from, to, forward, backward)`.
#[derive(Debug, Clone)]
pub struct RandomGraph {
    pub prestige: Vec<f32>,
    pub links: Vec<(NodeId, NodeId, f32, f32)>,
}

impl RandomGraph {
    /// `simple` allows at most one link per unordered node pair.
    pub fn generate(rng: &mut impl Rng, n: usize, links: usize, simple: bool) -> Self {
        let prestige = (0..n).map(|_| rng.gen_range(0.1f32..3.0)).collect();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        if n >= 2 {
            let max = if simple { n * (n - 1) / 2 } else { n * (n - 1) };
            let want = links.min(max);
            while out.len() < want {
                let u = rng.gen_range(0..n as NodeId);
                let v = rng.gen_range(0..n as NodeId);
                let key = if simple { (u.min(v), u.max(v)) } else { (u, v) };
                if u != v && seen.insert(key) {
                    out.push((u, v, rng.gen_range(0.5f32..4.0), rng.gen_range(0.5f32..6.0)));
                }
            }
        }
        Self { prestige, links: out }
    }

    pub fn node_count(&self) -> usize {
        self.prestige.len()
    }

    pub fn build(&self) -> DataGraph {
        let n = self.node_count();
        let mut b = GraphBuilder::with_nodes(self.prestige.clone(), vec![0; n]);
        for &(u, v, fw, bw) in &self.links {
            b.add_link(u, v, fw, bw, 1.0);
        }
        b.build().expect("generated links are in range")
    }

    /// Directed adjacency with the cheapest weight per ordered pair.
    pub fn adjacency(&self) -> Vec<BTreeMap<usize, f64>> {
        let mut adj = vec![BTreeMap::new(); self.node_count()];
        let mut put = |a: NodeId, b: NodeId, w: f32| {
            let e = adj[a as usize].entry(b as usize).or_insert(f64::INFINITY);
            *e = f64::min(*e, w as f64);
        };
        for &(u, v, fw, bw) in &self.links {
            put(u, v, fw);
            put(v, u, bw);
        }
        adj
    }
}

/// Random keyword sets of 1..=max_size nodes each.
pub fn random_sets(rng: &mut impl Rng, n: usize, count: usize, max_size: usize) -> Vec<Vec<NodeId>> {
    let all: Vec<NodeId> = (0..n as NodeId).collect();
    (0..count)
        .map(|_| {
            let size = rng.gen_range(1..=max_size.min(n));
            let mut s: Vec<NodeId> = all.choose_multiple(rng, size).copied().collect();
            s.sort_unstable();
            s
        })
        .collect()
}

fn dijkstra(adj: &[BTreeMap<usize, f64>], src: usize) -> (Vec<f64>, Vec<Option<usize>>) {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut pred = vec![None; adj.len()];
    dist[src] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((Ord64(0.0), src)));
    while let Some(Reverse((Ord64(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for (&v, &w) in &adj[u] {
            if d + w < dist[v] {
                dist[v] = d + w;
                pred[v] = Some(u);
                heap.push(Reverse((Ord64(d + w), v)));
            }
        }
    }
    (dist, pred)
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct Ord64(f64);

impl Eq for Ord64 {}

impl Ord for Ord64 {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// A reference answer: root, sorted `(parent, child)` edges and score.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleAnswer {
    pub root: NodeId,
    pub edges: Vec<(NodeId, NodeId)>,
    pub nodes: usize,
    pub score: f64,
}

/// Every answer the shortest-path tree model admits, scored additively with
/// `1 / (1 + total weight)` as edge score, best first.
///
/// For each root and each choice of one keyword node per set, the tree is
/// the union of the root's shortest paths to the chosen nodes. Trees whose
/// root has one child while the other nodes already cover every set are
/// dropped.
pub fn enumerate_answers(rg: &RandomGraph, sets: &[Vec<NodeId>], lambda: f64) -> Vec<OracleAnswer> {
    let adj = rg.adjacency();
    let n = rg.node_count();
    let mut found: BTreeMap<(NodeId, Vec<(NodeId, NodeId)>), OracleAnswer> = BTreeMap::new();
    for r in 0..n {
        let (dist, pred) = dijkstra(&adj, r);
        let mut pick = vec![0usize; sets.len()];
        'combos: loop {
            let chosen: Vec<usize> = pick.iter().zip(sets).map(|(&p, s)| s[p] as usize).collect();
            if chosen.iter().all(|&k| dist[k].is_finite()) {
                let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
                for &k in &chosen {
                    let mut x = k;
                    while x != r {
                        let p = pred[x].expect("reachable");
                        parent.insert(x, p);
                        x = p;
                    }
                }
                let mut nodes: BTreeSet<usize> = parent.keys().copied().collect();
                nodes.insert(r);
                let root_children = parent.values().filter(|&&p| p == r).count();
                let covered_below = sets
                    .iter()
                    .all(|s| s.iter().any(|&k| k as usize != r && nodes.contains(&(k as usize))));
                let redundant_root = !parent.is_empty() && root_children == 1 && covered_below;
                if !redundant_root {
                    let has_child: BTreeSet<usize> = parent.values().copied().collect();
                    let leaves = nodes.iter().filter(|&&x| x != r && !has_child.contains(&x));
                    let ns = rg.prestige[r] as f64
                        + leaves.map(|&l| rg.prestige[l] as f64).sum::<f64>();
                    let total: f64 = parent.iter().map(|(&c, &p)| adj[p][&c]).sum();
                    let es = if parent.is_empty() { 1.0 } else { 1.0 / (1.0 + total) };
                    let mut edges: Vec<(NodeId, NodeId)> =
                        parent.iter().map(|(&c, &p)| (p as NodeId, c as NodeId)).collect();
                    edges.sort_unstable();
                    let key = (r as NodeId, edges.clone());
                    found.entry(key).or_insert(OracleAnswer {
                        root: r as NodeId,
                        edges,
                        nodes: nodes.len(),
                        score: lambda * ns + (1.0 - lambda) * es,
                    });
                }
            }
            for (j, p) in pick.iter_mut().enumerate() {
                *p += 1;
                if *p < sets[j].len() {
                    continue 'combos;
                }
                *p = 0;
            }
            break;
        }
    }
    let mut all: Vec<OracleAnswer> = found.into_values().collect();
    all.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.nodes.cmp(&b.nodes))
            .then(a.root.cmp(&b.root))
            .then_with(|| a.edges.cmp(&b.edges))
    });
    all
}

/// Cheapest node-level tree realizing a cluster-level answer, by
/// Dreyfus-Wagner over group terminals.
///
/// The tree is rooted in the answer's root cluster, may use edges inside the
/// answer's clusters and member edges along the answer's superedges (in their
/// direction), and must contain, for each keyword `i`, a node of `sets[i]`
/// inside the cluster the answer assigns to keyword `i`.
pub fn realization_cost(
    rg: &RandomGraph,
    mapping: &[u32],
    answer: &AnswerTree,
    sets: &[Vec<NodeId>],
) -> Option<f64> {
    let n = rg.node_count();
    let t = sets.len();
    let size = n + t;
    let inside: BTreeSet<u32> = answer.nodes().iter().copied().collect();
    let superedges: BTreeSet<(u32, u32)> = answer.edges().iter().map(|e| (e.parent, e.child)).collect();

    let mut dist = vec![vec![f64::INFINITY; size]; size];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (u, row) in rg.adjacency().iter().enumerate() {
        for (&v, &w) in row {
            let (cu, cv) = (mapping[u], mapping[v]);
            let allowed = (cu == cv && inside.contains(&cu)) || superedges.contains(&(cu, cv));
            if allowed && w < dist[u][v] {
                dist[u][v] = w;
            }
        }
    }
    for (i, set) in sets.iter().enumerate() {
        for &k in set {
            if mapping[k as usize] == answer.keyword_nodes()[i] {
                dist[k as usize][n + i] = 0.0;
            }
        }
    }
    for m in 0..size {
        for a in 0..size {
            if dist[a][m].is_infinite() {
                continue;
            }
            for b in 0..size {
                let via = dist[a][m] + dist[m][b];
                if via < dist[a][b] {
                    dist[a][b] = via;
                }
            }
        }
    }

    let full = (1usize << t) - 1;
    let mut dp = vec![vec![f64::INFINITY; size]; full + 1];
    for i in 0..t {
        for v in 0..size {
            dp[1 << i][v] = dist[v][n + i];
        }
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut split = vec![f64::INFINITY; size];
        let mut sub = (mask - 1) & mask;
        while sub > 0 {
            if sub < (mask ^ sub) {
                for (u, s) in split.iter_mut().enumerate() {
                    *s = s.min(dp[sub][u] + dp[mask ^ sub][u]);
                }
            }
            sub = (sub - 1) & mask;
        }
        for v in 0..size {
            dp[mask][v] = (0..size)
                .map(|u| dist[v][u] + split[u])
                .fold(f64::INFINITY, f64::min);
        }
    }
    (0..n)
        .filter(|&r| mapping[r] == answer.root())
        .map(|r| dp[full][r])
        .filter(|c| c.is_finite())
        .min_by(f64::total_cmp)
}

/// Whether every cluster is connected through links between its members.
pub fn clusters_connected(rg: &RandomGraph, clustering: &Clustering) -> bool {
    let map = clustering.node_mapping();
    (0..clustering.k() as u32).all(|c| {
        let members = clustering.members(c);
        let mut seen = BTreeSet::from([members[0]]);
        let mut stack = vec![members[0]];
        while let Some(u) = stack.pop() {
            for &(a, b, _, _) in &rg.links {
                for (x, y) in [(a, b), (b, a)] {
                    if x == u && map[y as usize] == c && seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
        }
        seen.len() == members.len()
    })
}

/// Node texts carrying `k0`, `k1`, ... for the given keyword sets plus a
/// per-node filler term.
pub fn keyword_meta(n: usize, sets: &[Vec<NodeId>]) -> NodeMeta {
    let mut texts: Vec<String> = (0..n).map(|i| format!("node{i}")).collect();
    for (i, set) in sets.iter().enumerate() {
        for &k in set {
            texts[k as usize].push_str(&format!(" k{i}"));
        }
    }
    NodeMeta {
        tables: vec!["t".into()],
        keys: (0..n).map(|i| i.to_string()).collect(),
        texts,
    }
}

pub fn keyword_terms(count: usize) -> Vec<String> {
    (0..count).map(|i| format!("k{i}")).collect()
}

/// Writes a store for `g` under `dir` and opens it.
pub fn make_store(dir: &Path, g: &DataGraph, meta: &NodeMeta, clustering: &Clustering) -> Store {
    let index = KeywordIndex::build(meta, g.node_types(), IndexOptions::default());
    build_store(dir, g, meta, &index, clustering, BuildOptions::default()).expect("store builds");
    Store::open(dir).expect("store opens")
}

/// Subgraph of `g` induced by `keep` (sorted global ids), relabeled by rank.
/// Returns `(source, target, weight)` per slot in original slot order.
pub fn induced_slots(g: &DataGraph, keep: &[NodeId]) -> Vec<Vec<(NodeId, f32)>> {
    keep.iter()
        .map(|&u| {
            g.out_edges(u)
                .filter_map(|s| keep.binary_search(&s.target).ok().map(|i| (i as NodeId, s.weight)))
                .collect()
        })
        .collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}
