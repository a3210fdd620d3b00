use std::path::Path;

use crate::error::Result;
use crate::graph::{ingest, prune_transitive, DataGraph, IngestSpec, NodeMeta};
use crate::index::{IndexOptions, KeywordIndex};

/// A node-level graph with its text and keyword index.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: DataGraph,
    pub meta: NodeMeta,
    pub index: KeywordIndex,
    pub warnings: Vec<String>,
}

/// Ingests `data_dir` under `schema`, optionally removing pure link relations.
pub fn load_dataset(schema: &Path, data_dir: &Path, prune: bool) -> Result<Dataset> {
    let spec = IngestSpec::from_file(schema)?;
    let ingested = ingest(&spec, data_dir)?;
    let (graph, meta) = if prune {
        let p = prune_transitive(&ingested.graph, &ingested.meta, &spec)?;
        (p.graph, p.meta)
    } else {
        (ingested.graph, ingested.meta)
    };
    let index = KeywordIndex::build(&meta, graph.node_types(), IndexOptions::default());
    Ok(Dataset {
        graph,
        meta,
        index,
        warnings: ingested.warnings,
    })
}
