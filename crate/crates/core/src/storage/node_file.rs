use std::path::Path;

use super::codec::{read_file, write_file, Decoder, Encoder};
use super::graph_file::{decode_graph, encode_graph};
use crate::error::Result;
use crate::graph::{DataGraph, NodeMeta};

pub const NODES_MAGIC: &[u8; 4] = b"EMBN";
pub const NODES_VERSION: u16 = 1;

/// Node-level graph with its descriptive data, as produced by ingestion.
pub fn write_nodes(g: &DataGraph, meta: &NodeMeta, path: &Path) -> Result<()> {
    let mut e = Encoder::new(NODES_MAGIC, NODES_VERSION);
    e.u32(g.node_count() as u32);
    e.u32(g.slot_count() as u32);
    e.u32(meta.tables.len() as u32);
    encode_graph(&mut e, g);
    e.strings(&meta.tables);
    e.strings(&meta.keys);
    e.strings(&meta.texts);
    write_file(path, &e.finish())
}

pub fn read_nodes(path: &Path) -> Result<(DataGraph, NodeMeta)> {
    let bytes = read_file(path)?;
    let mut d = Decoder::open(path, &bytes, NODES_MAGIC, NODES_VERSION)?;
    let n = d.u32()? as usize;
    let slots = d.u32()? as usize;
    let tables = d.u32()? as usize;
    let g = decode_graph(&mut d, n, slots)?;
    let meta = NodeMeta {
        tables: d.strings(tables)?,
        keys: d.strings(n)?,
        texts: d.strings(n)?,
    };
    d.finish()?;
    Ok((g, meta))
}
