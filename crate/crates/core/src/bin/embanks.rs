use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use embanks::clustering::{
    cluster, pack_clusters, ClusterAlgorithm, EdgeCombiner, PrestigeCombiner, WeightConfig,
};
use embanks::engine::{
    compare_precision, generate_synthetic, load_dataset, two_phase_query, ComparisonReport,
    EngineConfig, ExtraClusterPolicy, SynthSpec,
};
use embanks::graph::NodeId;
use embanks::scoring::ScoredAnswer;
use embanks::search::{search, Algorithm, KeywordSets, SearchConfig, SearchStats};
use embanks::storage::{
    build_store, read_index, read_nodes, write_index, write_nodes, BuildOptions, Store,
    INDEX_FILE, NODES_FILE,
};
use embanks::{Error, Result};

#[derive(Parser)]
#[command(name = "embanks", version, about = "Keyword search over relational graphs stored on disk")]
struct Cli {
    /// Print time and node counts to stderr.
    #[arg(long, global = true)]
    stats: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest tab-separated tables into a new store.
    Ingest {
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replace pure link relations by direct edges.
        #[arg(long)]
        prune: bool,
    },
    /// Partition an ingested store and write its cluster files.
    Cluster {
        #[arg(long, default_value = "greedymin")]
        algo: ClusterAlgorithm,
        #[arg(long, default_value_t = 100)]
        size: usize,
        #[arg(long, default_value = "invsum")]
        edge_combiner: EdgeCombiner,
        #[arg(long, default_value = "sum")]
        prestige: PrestigeCombiner,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep the algorithm's clusters instead of repacking them.
        #[arg(long)]
        no_pack: bool,
        /// Also store per-cluster entry/exit cost tables.
        #[arg(long)]
        in_out_table: bool,
    },
    /// Two-phase query against a clustered store.
    Query {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Cluster-level answers collected before expansion.
        #[arg(long, default_value_t = 100)]
        limit: usize,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        /// Bytes allowed for clusters beyond the phase-1 answers.
        #[arg(long, default_value_t = 0)]
        budget: u64,
        #[arg(long, default_value = "backward")]
        algo1: Algorithm,
        #[arg(long, default_value = "bidi")]
        algo2: Algorithm,
        #[arg(long, default_value = "keyword-clusters")]
        policy: ExtraClusterPolicy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        search: SearchArgs,
        keywords: String,
    },
    /// Single-phase search over the whole node-level graph.
    Baseline {
        #[arg(long)]
        data: PathBuf,
        /// Defaults to DATA/schema.txt.
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        prune: bool,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value = "bidi")]
        algo: Algorithm,
        #[command(flatten)]
        search: SearchArgs,
        keywords: String,
    },
    /// Compare two-phase answers with the baseline for every query in a file.
    Compare {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// One query per line, terms separated by spaces.
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        prune: bool,
        #[arg(long, default_value_t = 100)]
        limit: usize,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        budget: u64,
        #[arg(long, default_value = "backward")]
        algo1: Algorithm,
        #[arg(long, default_value = "bidi")]
        algo2: Algorithm,
        #[arg(long, default_value = "bidi")]
        baseline_algo: Algorithm,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Generate a synthetic bibliographic dataset.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone, Copy)]
struct SearchArgs {
    #[arg(long, default_value_t = 0.2)]
    lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    /// Candidate trees generated before a search stops; 0 means no limit.
    #[arg(long, default_value_t = 2000)]
    candidates: usize,
    #[arg(long)]
    steiner_filter: bool,
}

impl SearchArgs {
    fn config(self, k: usize) -> SearchConfig {
        let mut cfg = SearchConfig {
            k,
            mu: self.mu,
            steiner_filter: self.steiner_filter,
            candidate_budget: (self.candidates > 0).then_some(self.candidates),
            ..SearchConfig::default()
        };
        cfg.score.lambda = self.lambda;
        cfg
    }
}

fn terms(keywords: &str) -> Vec<String> {
    keywords.split_whitespace().map(str::to_string).collect()
}

fn answer_json(rank: usize, a: &ScoredAnswer, text: impl Fn(NodeId) -> String) -> serde_json::Value {
    json!({
        "rank": rank + 1,
        "score": a.score,
        "node_score": a.node_score,
        "edge_score": a.edge_score,
        "root": a.tree.root(),
        "edges": a.tree.edges().iter().map(|e| json!([e.parent, e.child, e.weight])).collect::<Vec<_>>(),
        "keyword_nodes": a.tree.keyword_nodes(),
        "nodes": a.tree.nodes().iter().map(|&v| json!({"id": v, "text": text(v)})).collect::<Vec<_>>(),
    })
}

fn print_stats(enabled: bool, label: &str, started: Instant, s: Option<&SearchStats>) {
    if !enabled {
        return;
    }
    let ms = started.elapsed().as_secs_f64() * 1000.0;
    match s {
        Some(s) => eprintln!(
            "{label}: time_ms={ms:.3} nodes_touched={} nodes_explored={} answers={} candidates={}",
            s.nodes_touched, s.nodes_explored, s.answers_emitted, s.candidates
        ),
        None => eprintln!("{label}: time_ms={ms:.3}"),
    }
}

fn schema_path(schema: Option<PathBuf>, data: &Path) -> PathBuf {
    schema.unwrap_or_else(|| data.join("schema.txt"))
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let stats = cli.stats;
    match cli.command {
        Command::Ingest {
            schema,
            data,
            out,
            prune,
        } => {
            let ds = load_dataset(&schema, &data, prune)?;
            for w in &ds.warnings {
                eprintln!("warning: {w}");
            }
            std::fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            write_nodes(&ds.graph, &ds.meta, &out.join(NODES_FILE))?;
            write_index(&ds.index, &out.join(INDEX_FILE))?;
            println!(
                "{}",
                json!({
                    "nodes": ds.graph.node_count(),
                    "slots": ds.graph.slot_count(),
                    "terms": ds.index.term_count(),
                    "estimated_bytes": ds.graph.memory_estimate().bytes,
                })
            );
            print_stats(stats, "ingest", started, None);
        }
        Command::Cluster {
            algo,
            size,
            edge_combiner,
            prestige,
            store,
            seed,
            no_pack,
            in_out_table,
        } => {
            let (g, meta) = read_nodes(&store.join(NODES_FILE))?;
            let index = read_index(&store.join(INDEX_FILE))?;
            let mut clustering = cluster(&g, algo, size, seed)?;
            if !no_pack {
                clustering = pack_clusters(&g, &clustering)?;
            }
            let options = BuildOptions {
                weights: WeightConfig {
                    edge: edge_combiner,
                    prestige,
                },
                in_out_table,
            };
            let cg = build_store(&store, &g, &meta, &index, &clustering, options)?;
            let cgraph = &cg.cluster_graph.graph;
            println!(
                "{}",
                json!({
                    "nodes": g.node_count(),
                    "clusters": clustering.k(),
                    "superedge_slots": cgraph.slot_count(),
                    "estimated_bytes": g.memory_estimate().bytes,
                    "cluster_graph_bytes": cgraph.memory_estimate().bytes,
                })
            );
            print_stats(stats, "cluster", started, None);
        }
        Command::Query {
            store,
            k,
            limit,
            gamma,
            budget,
            algo1,
            algo2,
            policy,
            seed,
            search: sargs,
            keywords,
        } => {
            let store = Store::open(&store)?;
            let cfg = EngineConfig {
                phase1_limit: limit,
                phase1_algorithm: algo1,
                phase2_algorithm: algo2,
                gamma,
                memory_budget_bytes: budget,
                extra_policy: policy,
                seed,
                search: sargs.config(k),
                ..EngineConfig::default()
            };
            let r = two_phase_query(&store, &terms(&keywords), &cfg)?;
            for (i, a) in r.answers.iter().enumerate() {
                println!("{}", answer_json(i, a, |v| r.node_text[&v].clone()));
            }
            println!(
                "{}",
                json!({
                    "answers": r.answers.len(),
                    "phase1_answers": r.phase1_answers,
                    "expanded_clusters": r.expanded_cluster_ids,
                    "refetch_events": r.refetch_events,
                })
            );
            if stats {
                eprintln!("clusters_read={}", r.clusters_read);
            }
            print_stats(stats, "query", started, Some(&r.stats));
        }
        Command::Baseline {
            data,
            schema,
            prune,
            k,
            algo,
            search: sargs,
            keywords,
        } => {
            let ds = load_dataset(&schema_path(schema, &data), &data, prune)?;
            let ks = KeywordSets::from_terms(&ds.index, &terms(&keywords))?;
            let r = search(algo, &ds.graph, &ks, &sargs.config(k))?;
            for (i, a) in r.answers.iter().enumerate() {
                println!("{}", answer_json(i, a, |v| ds.meta.texts[v as usize].clone()));
            }
            print_stats(stats, "baseline", started, Some(&r.stats));
        }
        Command::Compare {
            store,
            data,
            queries,
            schema,
            prune,
            limit,
            gamma,
            budget,
            algo1,
            algo2,
            baseline_algo,
            search: sargs,
        } => {
            let store = Store::open(&store)?;
            let ds = load_dataset(&schema_path(schema, &data), &data, prune)?;
            let text = std::fs::read_to_string(&queries).map_err(|e| Error::Io {
                path: queries.clone(),
                source: e,
            })?;
            let cfg = EngineConfig {
                phase1_limit: limit,
                phase1_algorithm: algo1,
                phase2_algorithm: algo2,
                gamma,
                memory_budget_bytes: budget,
                search: sargs.config(10),
                ..EngineConfig::default()
            };
            let mut report = ComparisonReport::default();
            let mut system_stats = SearchStats::default();
            let mut baseline_stats = SearchStats::default();
            for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
                let t = terms(line);
                let sys = two_phase_query(&store, &t, &cfg)?;
                let ks = KeywordSets::from_terms(&ds.index, &t)?;
                let base = search(baseline_algo, &ds.graph, &ks, &cfg.search)?;
                system_stats += sys.stats;
                baseline_stats += base.stats;
                let c = compare_precision(&sys.answers, &base.answers);
                println!(
                    "{}",
                    json!({
                        "query": line,
                        "exact_overlap": c.exact_overlap,
                        "acceptable_count": c.acceptable_count,
                        "system_answers": c.system_answers,
                        "baseline_answers": c.baseline_answers,
                        "system_nodes_touched": sys.stats.nodes_touched,
                        "baseline_nodes_touched": base.stats.nodes_touched,
                    })
                );
                report.push(line, c);
            }
            println!(
                "{}",
                json!({
                    "queries": report.queries.len(),
                    "mean_exact_overlap": report.mean_exact_overlap(),
                    "mean_acceptable": report.mean_acceptable(),
                })
            );
            print_stats(stats, "compare/system", started, Some(&system_stats));
            print_stats(stats, "compare/baseline", started, Some(&baseline_stats));
        }
        Command::Synth { spec, out } => {
            let spec = SynthSpec::from_file(&spec)?;
            generate_synthetic(&spec, &out)?;
            println!(
                "{}",
                json!({
                    "papers": spec.papers,
                    "authors": spec.authors,
                    "writes": spec.writes,
                    "cites": spec.cites,
                    "nodes": spec.node_count(),
                })
            );
            print_stats(stats, "synth", started, None);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
