//! Flat-array tuple graph.
//!
//! Every node owns a contiguous run of adjacency slots in `adjacent`, delimited
//! by `offsets`. A foreign-key reference `u -> v` is stored twice: a forward
//! slot at `u` and a backward slot at `v` pointing back at `u`. The two slots
//! of a link are partners; `partner` is derived on construction and never
//! serialized.

mod ingest;
mod prune;

pub use ingest::{
    assign_backward_weights, ingest, ingest_tables, ForeignKey, IngestSpec, Ingested, NodeMeta,
    TableData, TableSpec,
};
pub use prune::{prune_transitive, Pruned};

use crate::error::{Error, Result};

pub type NodeId = u32;
pub type EdgeSlot = u32;

/// Orientation of an adjacency slot relative to the foreign key it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMode {
    In,
    Out,
}

/// One bit per adjacency slot, LSB-first within each byte.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DirectionBits {
    bytes: Vec<u8>,
    len: usize,
}

impl DirectionBits {
    pub fn with_len(len: usize) -> Self {
        Self {
            bytes: vec![0; len.div_ceil(8)],
            len,
        }
    }

    pub fn from_bytes(bytes: Vec<u8>, len: usize) -> Option<Self> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        Some(Self { bytes, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, slot: usize) -> Direction {
        if self.bytes[slot / 8] & (1 << (slot % 8)) != 0 {
            Direction::Forward
        } else {
            Direction::Backward
        }
    }

    pub fn set(&mut self, slot: usize, dir: Direction) {
        let mask = 1 << (slot % 8);
        match dir {
            Direction::Forward => self.bytes[slot / 8] |= mask,
            Direction::Backward => self.bytes[slot / 8] &= !mask,
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }
}

/// Immutable directed tuple graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DataGraph {
    prestige: Vec<f32>,
    node_type: Vec<u16>,
    offsets: Vec<u32>,
    adjacent: Vec<NodeId>,
    weight: Vec<f32>,
    priority: Vec<f32>,
    direction: DirectionBits,
    partner: Vec<EdgeSlot>,
}

/// Raw arrays of a [`DataGraph`], in the order they are serialized.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphParts {
    pub prestige: Vec<f32>,
    pub node_type: Vec<u16>,
    pub offsets: Vec<u32>,
    pub adjacent: Vec<NodeId>,
    pub weight: Vec<f32>,
    pub priority: Vec<f32>,
    pub direction: DirectionBits,
}

/// A single slot as seen from its owning node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub index: EdgeSlot,
    pub target: NodeId,
    pub weight: f32,
    pub priority: f32,
    pub direction: Direction,
}

impl DataGraph {
    pub fn empty() -> Self {
        Self::from_parts(GraphParts {
            offsets: vec![0],
            ..GraphParts::default()
        })
        .expect("empty graph is valid")
    }

    /// Validates raw arrays and pairs every forward slot with its backward partner.
    pub fn from_parts(parts: GraphParts) -> Result<Self> {
        let GraphParts {
            prestige,
            node_type,
            offsets,
            adjacent,
            weight,
            priority,
            direction,
        } = parts;
        let n = prestige.len();
        if node_type.len() != n {
            return Err(Error::InvalidGraph(format!(
                "{} node types for {n} nodes",
                node_type.len()
            )));
        }
        if n > u32::MAX as usize - 1 {
            return Err(Error::InvalidGraph("too many nodes".into()));
        }
        if offsets.len() != n + 1 || offsets[0] != 0 {
            return Err(Error::InvalidGraph("offset array malformed".into()));
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidGraph("offsets not monotone".into()));
        }
        let m = offsets[n] as usize;
        if adjacent.len() != m || weight.len() != m || priority.len() != m || direction.len() != m
        {
            return Err(Error::InvalidGraph(format!(
                "slot arrays disagree with offsets (expected {m} slots)"
            )));
        }
        if let Some(&bad) = adjacent.iter().find(|&&v| v as usize >= n) {
            return Err(Error::InvalidGraph(format!("slot targets missing node {bad}")));
        }
        if weight.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidGraph("edge weights must be positive".into()));
        }
        if prestige.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidGraph("prestige must be non-negative".into()));
        }

        // Pair the k-th forward slot (u -> v) with the k-th backward slot (v -> u).
        let mut fwd: Vec<(NodeId, NodeId, EdgeSlot)> = Vec::new();
        let mut bwd: Vec<(NodeId, NodeId, EdgeSlot)> = Vec::new();
        for u in 0..n {
            for s in offsets[u] as usize..offsets[u + 1] as usize {
                let v = adjacent[s];
                match direction.get(s) {
                    Direction::Forward => fwd.push((u as NodeId, v, s as EdgeSlot)),
                    Direction::Backward => bwd.push((v, u as NodeId, s as EdgeSlot)),
                }
            }
        }
        if fwd.len() != bwd.len() {
            return Err(Error::InvalidGraph(format!(
                "{} forward slots but {} backward slots",
                fwd.len(),
                bwd.len()
            )));
        }
        fwd.sort_unstable();
        bwd.sort_unstable();
        let mut partner = vec![0; m];
        for (f, b) in fwd.iter().zip(&bwd) {
            if (f.0, f.1) != (b.0, b.1) {
                return Err(Error::InvalidGraph(format!(
                    "forward slot {}->{} has no backward partner",
                    f.0, f.1
                )));
            }
            partner[f.2 as usize] = b.2;
            partner[b.2 as usize] = f.2;
        }

        Ok(Self {
            prestige,
            node_type,
            offsets,
            adjacent,
            weight,
            priority,
            direction,
            partner,
        })
    }

    pub fn into_parts(self) -> GraphParts {
        GraphParts {
            prestige: self.prestige,
            node_type: self.node_type,
            offsets: self.offsets,
            adjacent: self.adjacent,
            weight: self.weight,
            priority: self.priority,
            direction: self.direction,
        }
    }

    pub fn to_parts(&self) -> GraphParts {
        self.clone().into_parts()
    }

    pub fn node_count(&self) -> usize {
        self.prestige.len()
    }

    /// Number of adjacency slots (two per stored link).
    pub fn slot_count(&self) -> usize {
        self.adjacent.len()
    }

    pub fn prestige(&self) -> &[f32] {
        &self.prestige
    }

    pub fn node_types(&self) -> &[u16] {
        &self.node_type
    }

    pub fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub fn adjacent(&self) -> &[NodeId] {
        &self.adjacent
    }

    pub fn weights(&self) -> &[f32] {
        &self.weight
    }

    pub fn priorities(&self) -> &[f32] {
        &self.priority
    }

    pub fn directions(&self) -> &DirectionBits {
        &self.direction
    }

    pub fn partner(&self, slot: EdgeSlot) -> EdgeSlot {
        self.partner[slot as usize]
    }

    pub fn slot_range(&self, n: NodeId) -> std::ops::Range<usize> {
        self.offsets[n as usize] as usize..self.offsets[n as usize + 1] as usize
    }

    pub fn slot(&self, index: usize) -> Slot {
        Slot {
            index: index as EdgeSlot,
            target: self.adjacent[index],
            weight: self.weight[index],
            priority: self.priority[index],
            direction: self.direction.get(index),
        }
    }

    /// Outgoing edges `n -> target` in slot order.
    pub fn out_edges(&self, n: NodeId) -> impl Iterator<Item = Slot> + '_ {
        self.slot_range(n).map(move |s| self.slot(s))
    }

    /// Incoming edges `source -> n`, as `(source, weight)`, in slot order of `n`.
    pub fn in_edges(&self, n: NodeId) -> impl Iterator<Item = (NodeId, f32)> + '_ {
        self.slot_range(n)
            .map(move |s| (self.adjacent[s], self.weight[self.partner[s] as usize]))
    }

    /// Foreign-key degree computed from the slot span and direction bits.
    ///
    /// `Out` counts forward slots (references held by `n`), `In` counts
    /// backward slots (references pointing at `n`). When both directions are
    /// balanced this is half the span.
    pub fn degree(&self, n: NodeId, mode: DegreeMode) -> usize {
        let wanted = match mode {
            DegreeMode::Out => Direction::Forward,
            DegreeMode::In => Direction::Backward,
        };
        self.slot_range(n)
            .filter(|&s| self.direction.get(s) == wanted)
            .count()
    }

    pub fn memory_estimate(&self) -> MemoryEstimate {
        estimate_memory(self.node_count() as u64, self.slot_count() as u64)
    }

    pub(crate) fn with_weights(&self, weight: Vec<f32>) -> Result<Self> {
        let mut parts = self.to_parts();
        parts.weight = weight;
        Self::from_parts(parts)
    }
}

/// Bytes needed to hold a graph in the flat-array layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MemoryEstimate {
    pub bytes: u64,
}

pub const BYTES_PER_NODE: u64 = 20;
pub const BYTES_PER_EDGE: u64 = 12;

pub fn estimate_memory(nodes: u64, edges: u64) -> MemoryEstimate {
    MemoryEstimate {
        bytes: BYTES_PER_NODE * nodes + BYTES_PER_EDGE * edges,
    }
}

/// Incremental construction from links; each link becomes a forward slot at
/// `from` and a backward slot at `to`, both in insertion order.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    prestige: Vec<f32>,
    node_type: Vec<u16>,
    links: Vec<Link>,
}

#[derive(Debug, Clone, Copy)]
struct Link {
    from: NodeId,
    to: NodeId,
    forward_weight: f32,
    backward_weight: f32,
    priority: f32,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_nodes(prestige: Vec<f32>, node_type: Vec<u16>) -> Self {
        Self {
            prestige,
            node_type,
            links: Vec::new(),
        }
    }

    pub fn add_node(&mut self, prestige: f32, node_type: u16) -> NodeId {
        self.prestige.push(prestige);
        self.node_type.push(node_type);
        (self.prestige.len() - 1) as NodeId
    }

    pub fn node_count(&self) -> usize {
        self.prestige.len()
    }

    pub fn set_prestige(&mut self, n: NodeId, prestige: f32) {
        self.prestige[n as usize] = prestige;
    }

    pub fn add_link(
        &mut self,
        from: NodeId,
        to: NodeId,
        forward_weight: f32,
        backward_weight: f32,
        priority: f32,
    ) {
        self.links.push(Link {
            from,
            to,
            forward_weight,
            backward_weight,
            priority,
        });
    }

    pub fn build(self) -> Result<DataGraph> {
        let n = self.prestige.len();
        let mut counts = vec![0u32; n + 1];
        for l in &self.links {
            if l.from as usize >= n || l.to as usize >= n {
                return Err(Error::InvalidGraph(format!(
                    "link {}->{} references a missing node",
                    l.from, l.to
                )));
            }
            counts[l.from as usize + 1] += 1;
            counts[l.to as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let m = offsets[n] as usize;
        let mut cursor = counts;
        let mut adjacent = vec![0; m];
        let mut weight = vec![0.0; m];
        let mut priority = vec![0.0; m];
        let mut direction = DirectionBits::with_len(m);
        for l in &self.links {
            let s = cursor[l.from as usize] as usize;
            cursor[l.from as usize] += 1;
            adjacent[s] = l.to;
            weight[s] = l.forward_weight;
            priority[s] = l.priority;
            direction.set(s, Direction::Forward);

            let s = cursor[l.to as usize] as usize;
            cursor[l.to as usize] += 1;
            adjacent[s] = l.from;
            weight[s] = l.backward_weight;
            priority[s] = l.priority;
            direction.set(s, Direction::Backward);
        }
        DataGraph::from_parts(GraphParts {
            prestige: self.prestige,
            node_type: self.node_type,
            offsets,
            adjacent,
            weight,
            priority,
            direction,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> DataGraph {
        let mut b = GraphBuilder::new();
        for _ in 0..3 {
            b.add_node(1.0, 0);
        }
        b.add_link(0, 1, 1.0, 2.0, 0.0);
        b.add_link(1, 2, 1.0, 3.0, 0.0);
        b.add_link(0, 2, 1.0, 4.0, 0.0);
        b.build().unwrap()
    }

    #[test]
    fn offsets_and_pairs() {
        let g = triangle();
        assert_eq!(g.offsets(), &[0, 2, 4, 6]);
        for s in 0..g.slot_count() as u32 {
            let p = g.partner(s);
            assert_eq!(g.partner(p), s);
            assert_ne!(g.directions().get(s as usize), g.directions().get(p as usize));
        }
        let ins: Vec<_> = g.in_edges(2).collect();
        assert_eq!(ins, vec![(1, 1.0), (0, 1.0)]);
        let ins: Vec<_> = g.in_edges(0).collect();
        assert_eq!(ins, vec![(1, 2.0), (2, 4.0)]);
    }

    #[test]
    fn empty_graph_has_single_offset() {
        let g = GraphBuilder::new().build().unwrap();
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.offsets(), &[0]);
        assert_eq!(g, DataGraph::empty());
    }

    #[test]
    fn isolated_node_degree() {
        let mut b = GraphBuilder::new();
        b.add_node(0.0, 0);
        let g = b.build().unwrap();
        assert_eq!(g.degree(0, DegreeMode::In), 0);
        assert_eq!(g.degree(0, DegreeMode::Out), 0);
    }

    #[test]
    fn symmetric_span_six() {
        // three links out, three links in: span 6, in = out = 3
        let mut b = GraphBuilder::new();
        for _ in 0..4 {
            b.add_node(0.0, 0);
        }
        b.add_link(0, 1, 1.0, 1.0, 0.0);
        b.add_link(0, 2, 1.0, 1.0, 0.0);
        b.add_link(0, 3, 1.0, 1.0, 0.0);
        b.add_link(1, 0, 1.0, 1.0, 0.0);
        b.add_link(2, 0, 1.0, 1.0, 0.0);
        b.add_link(3, 0, 1.0, 1.0, 0.0);
        let g = b.build().unwrap();
        let span = g.slot_range(0).len();
        assert_eq!(span, 6);
        assert_eq!(g.degree(0, DegreeMode::In), span / 2);
        assert_eq!(g.degree(0, DegreeMode::Out), span / 2);
    }

    #[test]
    fn rejects_unpaired_slots() {
        let mut parts = triangle().into_parts();
        parts.direction.set(0, Direction::Backward);
        assert!(DataGraph::from_parts(parts).is_err());
    }

    #[test]
    fn rejects_nonpositive_weight() {
        let mut parts = triangle().into_parts();
        parts.weight[1] = 0.0;
        assert!(DataGraph::from_parts(parts).is_err());
    }

    #[test]
    fn memory_model() {
        assert_eq!(estimate_memory(1_000_000, 10_000_000).bytes, 140_000_000);
        assert_eq!(estimate_memory(500_000, 5_000_000).bytes, 70_000_000);
        assert_eq!(estimate_memory(0, 0).bytes, 0);
    }
}
