use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::codec::{read_file, write_file, Decoder, Encoder};
use crate::clustering::{ClusterId, Clustering};
use crate::error::{Error, Result};
use crate::graph::{DataGraph, Direction, DirectionBits, NodeId, NodeMeta};

pub const CLUSTER_MAGIC: &[u8; 4] = b"EMBC";
pub const CLUSTER_VERSION: u16 = 1;

/// A slot leaving the cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub source: u32,
    pub target: NodeId,
    pub target_cluster: ClusterId,
    pub weight: f32,
    pub priority: f32,
    pub direction: Direction,
    /// Index of the slot within the source node's slot list.
    pub position: u32,
}

/// Node-level contents of one cluster. Intra-cluster targets are local
/// indices into `members`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterFile {
    pub id: ClusterId,
    pub members: Vec<NodeId>,
    pub prestige: Vec<f32>,
    pub node_type: Vec<u16>,
    pub texts: Vec<String>,
    pub intra_offsets: Vec<u32>,
    pub intra_target: Vec<u32>,
    pub intra_weight: Vec<f32>,
    pub intra_priority: Vec<f32>,
    pub intra_direction: DirectionBits,
    pub intra_position: Vec<u32>,
    pub boundary: Vec<BoundaryEdge>,
}

impl ClusterFile {
    /// Slices cluster `id` out of the full graph.
    pub fn build(g: &DataGraph, meta: &NodeMeta, clustering: &Clustering, id: ClusterId) -> Self {
        let members = clustering.members(id).to_vec();
        let local: HashMap<NodeId, u32> = members.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
        let mut f = ClusterFile {
            id,
            prestige: members.iter().map(|&m| g.prestige()[m as usize]).collect(),
            node_type: members.iter().map(|&m| g.node_types()[m as usize]).collect(),
            texts: members.iter().map(|&m| meta.texts[m as usize].clone()).collect(),
            intra_offsets: vec![0],
            intra_target: Vec::new(),
            intra_weight: Vec::new(),
            intra_priority: Vec::new(),
            intra_direction: DirectionBits::with_len(0),
            intra_position: Vec::new(),
            boundary: Vec::new(),
            members,
        };
        let mut dirs = Vec::new();
        for (li, &m) in f.members.iter().enumerate() {
            for (pos, s) in g.out_edges(m).enumerate() {
                match local.get(&s.target) {
                    Some(&t) => {
                        f.intra_target.push(t);
                        f.intra_weight.push(s.weight);
                        f.intra_priority.push(s.priority);
                        f.intra_position.push(pos as u32);
                        dirs.push(s.direction);
                    }
                    None => f.boundary.push(BoundaryEdge {
                        source: li as u32,
                        target: s.target,
                        target_cluster: clustering.cluster_of(s.target),
                        weight: s.weight,
                        priority: s.priority,
                        direction: s.direction,
                        position: pos as u32,
                    }),
                }
            }
            f.intra_offsets.push(f.intra_target.len() as u32);
        }
        f.intra_direction = DirectionBits::with_len(dirs.len());
        for (i, d) in dirs.into_iter().enumerate() {
            f.intra_direction.set(i, d);
        }
        f
    }

    pub fn intra_slot_count(&self) -> usize {
        self.intra_target.len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let m = self.members.len();
        let mut e = Encoder::new(CLUSTER_MAGIC, CLUSTER_VERSION);
        e.u32(self.id);
        e.u32(m as u32);
        e.u32(self.intra_target.len() as u32);
        e.u32(self.boundary.len() as u32);
        e.u32s(&self.members);
        e.f32s(&self.prestige);
        e.u16s(&self.node_type);
        e.strings(&self.texts);
        e.u32s(&self.intra_offsets);
        e.u32s(&self.intra_target);
        e.f32s(&self.intra_weight);
        e.f32s(&self.intra_priority);
        e.bytes(self.intra_direction.as_bytes());
        e.u32s(&self.intra_position);
        let b = &self.boundary;
        e.u32s(&b.iter().map(|x| x.source).collect::<Vec<_>>());
        e.u32s(&b.iter().map(|x| x.target).collect::<Vec<_>>());
        e.u32s(&b.iter().map(|x| x.target_cluster).collect::<Vec<_>>());
        e.f32s(&b.iter().map(|x| x.weight).collect::<Vec<_>>());
        e.f32s(&b.iter().map(|x| x.priority).collect::<Vec<_>>());
        let mut bits = DirectionBits::with_len(b.len());
        for (i, x) in b.iter().enumerate() {
            bits.set(i, x.direction);
        }
        e.bytes(bits.as_bytes());
        e.u32s(&b.iter().map(|x| x.position).collect::<Vec<_>>());
        e.finish()
    }

    pub fn decode(path: &Path, bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::open(path, bytes, CLUSTER_MAGIC, CLUSTER_VERSION)?;
        let id = d.u32()?;
        let m = d.u32()? as usize;
        let intra = d.u32()? as usize;
        let nb = d.u32()? as usize;
        let members = d.u32s(m)?;
        let prestige = d.f32s(m)?;
        let node_type = d.u16s(m)?;
        let texts = d.strings(m)?;
        let intra_offsets = d.u32s(m + 1)?;
        if intra_offsets[0] != 0
            || intra_offsets[m] as usize != intra
            || intra_offsets.windows(2).any(|w| w[0] > w[1])
        {
            return Err(d.corrupt("intra offsets"));
        }
        let intra_target = d.u32s(intra)?;
        if intra_target.iter().any(|&t| t as usize >= m) {
            return Err(d.corrupt("intra target out of range"));
        }
        let intra_weight = d.f32s(intra)?;
        let intra_priority = d.f32s(intra)?;
        let intra_direction = DirectionBits::from_bytes(d.bytes(intra.div_ceil(8))?, intra)
            .ok_or_else(|| d.corrupt("direction bits"))?;
        let intra_position = d.u32s(intra)?;
        let source = d.u32s(nb)?;
        let target = d.u32s(nb)?;
        let target_cluster = d.u32s(nb)?;
        let weight = d.f32s(nb)?;
        let priority = d.f32s(nb)?;
        let bits = DirectionBits::from_bytes(d.bytes(nb.div_ceil(8))?, nb)
            .ok_or_else(|| d.corrupt("direction bits"))?;
        let position = d.u32s(nb)?;
        d.finish()?;
        let boundary: Vec<BoundaryEdge> = (0..nb)
            .map(|i| BoundaryEdge {
                source: source[i],
                target: target[i],
                target_cluster: target_cluster[i],
                weight: weight[i],
                priority: priority[i],
                direction: bits.get(i),
                position: position[i],
            })
            .collect();
        if boundary.iter().any(|b| b.source as usize >= m || b.target_cluster == id) {
            return Err(Error::Corrupt {
                path: path.into(),
                message: "boundary edge inconsistent with cluster".into(),
            });
        }
        Ok(Self {
            id,
            members,
            prestige,
            node_type,
            texts,
            intra_offsets,
            intra_target,
            intra_weight,
            intra_priority,
            intra_direction,
            intra_position,
            boundary,
        })
    }
}

pub fn cluster_path(dir: &Path, id: ClusterId) -> PathBuf {
    dir.join("clusters").join(format!("{id:04}.clu"))
}

/// Writes cluster files of one build in strictly ascending id order.
pub struct ClusterWriter {
    dir: PathBuf,
    last: Option<ClusterId>,
}

impl ClusterWriter {
    pub fn new(store_dir: &Path) -> Result<Self> {
        let clusters = store_dir.join("clusters");
        std::fs::create_dir_all(&clusters).map_err(|e| Error::io(&clusters, e))?;
        Ok(Self {
            dir: store_dir.to_path_buf(),
            last: None,
        })
    }

    pub fn write(&mut self, file: &ClusterFile) -> Result<()> {
        if let Some(previous) = self.last {
            if file.id <= previous {
                return Err(Error::OutOfOrderWrite {
                    id: file.id,
                    previous,
                });
            }
        }
        write_file(&cluster_path(&self.dir, file.id), &file.encode())?;
        self.last = Some(file.id);
        Ok(())
    }
}

pub fn read_cluster(id: ClusterId, store_dir: &Path) -> Result<ClusterFile> {
    let path = cluster_path(store_dir, id);
    let bytes = read_file(&path)?;
    let f = ClusterFile::decode(&path, &bytes)?;
    if f.id != id {
        return Err(Error::Corrupt {
            path,
            message: format!("file holds cluster {}", f.id),
        });
    }
    Ok(f)
}
