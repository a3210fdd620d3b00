use std::path::Path;

use super::codec::{read_file, write_file, Decoder, Encoder};
use super::index_file::{decode_index, encode_index};
use crate::clustering::{ClusterGraph, ClusterMetadata, Clustering, InOutCost};
use crate::error::Result;
use crate::graph::{DataGraph, DirectionBits, GraphParts};
use crate::index::ClusterKeywordIndex;

pub const GRAPH_MAGIC: &[u8; 4] = b"EMBK";
pub const GRAPH_VERSION: u16 = 1;

const FLAG_CLUSTER_INDEX: u16 = 1;
const FLAG_IN_OUT_TABLE: u16 = 1 << 1;

/// Everything kept in memory between queries.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedGraph {
    pub cluster_graph: ClusterGraph,
    pub clustering: Clustering,
    pub metadata: ClusterMetadata,
    /// Node-level slots owned by each cluster's members.
    pub cluster_slots: Vec<u32>,
    pub cluster_index: Option<ClusterKeywordIndex>,
}

/// Arrays of a graph whose node and slot counts were written earlier.
pub(crate) fn encode_graph(e: &mut Encoder, g: &DataGraph) {
    e.f32s(g.prestige());
    e.u16s(g.node_types());
    e.u32s(g.offsets());
    e.u32s(g.adjacent());
    e.f32s(g.weights());
    e.f32s(g.priorities());
    e.bytes(g.directions().as_bytes());
}

pub(crate) fn decode_graph(d: &mut Decoder, nodes: usize, slots: usize) -> Result<DataGraph> {
    let prestige = d.f32s(nodes)?;
    let node_type = d.u16s(nodes)?;
    let offsets = d.u32s(nodes + 1)?;
    let adjacent = d.u32s(slots)?;
    let weight = d.f32s(slots)?;
    let priority = d.f32s(slots)?;
    let direction = DirectionBits::from_bytes(d.bytes(slots.div_ceil(8))?, slots)
        .ok_or_else(|| d.corrupt("direction bits"))?;
    DataGraph::from_parts(GraphParts {
        prestige,
        node_type,
        offsets,
        adjacent,
        weight,
        priority,
        direction,
    })
    .map_err(|e| d.corrupt(e.to_string()))
}

pub fn encode_compressed_graph(cg: &CompressedGraph) -> Vec<u8> {
    let g = &cg.cluster_graph.graph;
    let c = &cg.clustering;
    let mut flags = 0;
    if cg.cluster_index.is_some() {
        flags |= FLAG_CLUSTER_INDEX;
    }
    if cg.metadata.in_out_table.is_some() {
        flags |= FLAG_IN_OUT_TABLE;
    }
    let mut e = Encoder::new(GRAPH_MAGIC, GRAPH_VERSION);
    e.u16(flags);
    e.u32(g.node_count() as u32);
    e.u32(g.slot_count() as u32);
    e.u32(c.node_count() as u32);
    e.u32(c.max_cluster_size() as u32);
    encode_graph(&mut e, g);
    e.u32s(c.node_mapping());
    e.u32s(c.cluster_offset());
    e.u32s(c.node_order());
    e.f64s(&cg.metadata.diameter);
    e.f64s(&cg.metadata.min_in_out);
    e.u32s(&cg.cluster_slots);
    e.f32s(&cg.cluster_graph.crossing_min);
    if let Some(table) = &cg.metadata.in_out_table {
        for row in table {
            e.u32(row.len() as u32);
        }
        for row in table {
            for x in row {
                e.u32(x.from);
                e.u32(x.to);
                e.f64s(&[x.cost]);
            }
        }
    }
    if let Some(idx) = &cg.cluster_index {
        encode_index(&mut e, idx.as_index());
    }
    e.finish()
}

pub fn write_compressed_graph(cg: &CompressedGraph, path: &Path) -> Result<()> {
    write_file(path, &encode_compressed_graph(cg))
}

pub fn read_compressed_graph(path: &Path) -> Result<CompressedGraph> {
    let bytes = read_file(path)?;
    let mut d = Decoder::open(path, &bytes, GRAPH_MAGIC, GRAPH_VERSION)?;
    let flags = d.u16()?;
    let k = d.u32()? as usize;
    let slots = d.u32()? as usize;
    let n = d.u32()? as usize;
    let max_cluster_size = d.u32()?;
    let graph = decode_graph(&mut d, k, slots)?;
    let mapping = d.u32s(n)?;
    let cluster_offset = d.u32s(k + 1)?;
    let node_order = d.u32s(n)?;
    let clustering = Clustering::from_parts(mapping, node_order, cluster_offset, max_cluster_size)
        .map_err(|e| d.corrupt(e.to_string()))?;
    if clustering.k() != k {
        return Err(d.corrupt("cluster count disagrees with mapping"));
    }
    let diameter = d.f64s(k)?;
    let min_in_out = d.f64s(k)?;
    let cluster_slots = d.u32s(k)?;
    let crossing_min = d.f32s(slots)?;
    let in_out_table = if flags & FLAG_IN_OUT_TABLE != 0 {
        let counts = d.u32s(k)?;
        let mut table = Vec::with_capacity(k);
        for &count in &counts {
            let mut row = Vec::with_capacity(count as usize);
            for _ in 0..count {
                let from = d.u32()?;
                let to = d.u32()?;
                let cost = d.f64s(1)?[0];
                row.push(InOutCost { from, to, cost });
            }
            table.push(row);
        }
        Some(table)
    } else {
        None
    };
    let cluster_index = if flags & FLAG_CLUSTER_INDEX != 0 {
        Some(ClusterKeywordIndex(decode_index(&mut d)?))
    } else {
        None
    };
    d.finish()?;
    Ok(CompressedGraph {
        cluster_graph: ClusterGraph {
            graph,
            crossing_min,
        },
        clustering,
        metadata: ClusterMetadata {
            diameter,
            min_in_out,
            in_out_table,
        },
        cluster_slots,
        cluster_index,
    })
}
