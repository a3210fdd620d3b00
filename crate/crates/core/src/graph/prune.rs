use std::collections::HashMap;

use super::{DataGraph, Direction, GraphBuilder, IngestSpec, NodeId, NodeMeta};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct Pruned {
    pub graph: DataGraph,
    pub meta: NodeMeta,
    /// Old node id -> new node id, `None` for removed nodes.
    pub remap: Vec<Option<NodeId>>,
}

#[derive(Debug, Clone, Copy)]
struct Link {
    from: NodeId,
    to: NodeId,
    fw: f32,
    bw: f32,
    priority: f32,
    alive: bool,
}

impl Link {
    fn other(&self, n: NodeId) -> NodeId {
        if self.from == n {
            self.to
        } else {
            self.from
        }
    }

    /// (cost from `n` across the link, cost back into `n`)
    fn costs_from(&self, n: NodeId) -> (f32, f32) {
        if self.from == n {
            (self.fw, self.bw)
        } else {
            (self.bw, self.fw)
        }
    }
}

/// Removes nodes of pure link relations (see [`IngestSpec::key_only_tables`]).
///
/// Every pair of links meeting at a removed node `w` becomes a direct link
/// whose weight in each direction is the sum of the two crossed slots. Links
/// created this way between the same pair of nodes are merged, keeping the
/// cheaper weight per direction, so shortest-path distances between the
/// surviving nodes are unchanged.
pub fn prune_transitive(g: &DataGraph, meta: &NodeMeta, spec: &IngestSpec) -> Result<Pruned> {
    let key_only = spec.key_only_tables();
    let n = g.node_count();
    let doomed: Vec<bool> = g
        .node_types()
        .iter()
        .map(|t| key_only.contains(&(*t as usize)))
        .collect();
    if !doomed.iter().any(|&d| d) {
        return Ok(Pruned {
            graph: g.clone(),
            meta: meta.clone(),
            remap: (0..n as NodeId).map(Some).collect(),
        });
    }

    let mut links = Vec::with_capacity(g.slot_count() / 2);
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in 0..n as NodeId {
        for s in g.slot_range(u) {
            if g.directions().get(s) != Direction::Forward {
                continue;
            }
            let v = g.adjacent()[s];
            let id = links.len();
            links.push(Link {
                from: u,
                to: v,
                fw: g.weights()[s],
                bw: g.weights()[g.partner(s as u32) as usize],
                priority: g.priorities()[s],
                alive: true,
            });
            incident[u as usize].push(id);
            if v != u {
                incident[v as usize].push(id);
            }
        }
    }
    // forward slots are visited per owning node; restore global link order per node
    for inc in &mut incident {
        inc.sort_unstable();
    }
    let original = links.len();

    // (min, max) endpoint pair -> index of the first derived link between them
    let mut derived: HashMap<(NodeId, NodeId), usize> = HashMap::new();
    for w in 0..n {
        if !doomed[w] {
            continue;
        }
        let wid = w as NodeId;
        let around: Vec<usize> = incident[w]
            .iter()
            .copied()
            .filter(|&l| links[l].alive)
            .collect();
        for &l in &around {
            links[l].alive = false;
        }
        for (i, &a) in around.iter().enumerate() {
            for &b in &around[i + 1..] {
                let (x, y) = (links[a].other(wid), links[b].other(wid));
                if x == wid || y == wid || x == y {
                    continue;
                }
                let (x_out, x_in) = links[a].costs_from(x);
                let (y_out, y_in) = links[b].costs_from(y);
                // x -> w -> y and y -> w -> x
                let fw = x_out + y_in;
                let bw = y_out + x_in;
                let priority = links[a].priority + links[b].priority;
                let key = (x.min(y), x.max(y));
                if let Some(&existing) = derived.get(&key) {
                    let e = &mut links[existing];
                    if e.from == x {
                        e.fw = e.fw.min(fw);
                        e.bw = e.bw.min(bw);
                    } else {
                        e.fw = e.fw.min(bw);
                        e.bw = e.bw.min(fw);
                    }
                    continue;
                }
                let id = links.len();
                links.push(Link {
                    from: x,
                    to: y,
                    fw,
                    bw,
                    priority,
                    alive: true,
                });
                derived.insert(key, id);
                incident[x as usize].push(id);
                incident[y as usize].push(id);
            }
        }
    }

    let mut remap = vec![None; n];
    let mut next = 0;
    let mut out_meta = NodeMeta {
        tables: meta.tables.clone(),
        ..NodeMeta::default()
    };
    let mut prestige = Vec::new();
    let mut types = Vec::new();
    for u in 0..n {
        if doomed[u] {
            continue;
        }
        remap[u] = Some(next);
        next += 1;
        prestige.push(g.prestige()[u]);
        types.push(g.node_types()[u]);
        out_meta.keys.push(meta.keys[u].clone());
        out_meta.texts.push(meta.texts[u].clone());
    }
    let mut builder = GraphBuilder::with_nodes(prestige, types);
    for (i, l) in links.iter().enumerate() {
        if !l.alive {
            continue;
        }
        debug_assert!(i >= original || (!doomed[l.from as usize] && !doomed[l.to as usize]));
        let (from, to) = (remap[l.from as usize], remap[l.to as usize]);
        if let (Some(from), Some(to)) = (from, to) {
            builder.add_link(from, to, l.fw, l.bw, l.priority);
        }
    }
    Ok(Pruned {
        graph: builder.build()?,
        meta: out_meta,
        remap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ingest_tables, TableData};

    #[test]
    fn writes_relation_is_pruned() {
        let spec = IngestSpec::parse(
            "table paper text=title\ntable author text=name\ntable writes\n\
             fk writes.paper -> paper.id\nfk writes.author -> author.id\n",
        )
        .unwrap();
        let tables = vec![
            TableData::parse("paper.tsv", "id\ttitle\np1\ta\np2\tb\np3\tc\n").unwrap(),
            TableData::parse("author.tsv", "id\tname\na1\tx\na2\ty\n").unwrap(),
            TableData::parse(
                "writes.tsv",
                "paper\tauthor\np1\ta1\np2\ta1\np2\ta2\np3\ta2\n",
            )
            .unwrap(),
        ];
        let ing = ingest_tables(&spec, &tables).unwrap();
        let p = prune_transitive(&ing.graph, &ing.meta, &spec).unwrap();
        assert_eq!(p.graph.node_count(), 5);
        assert_eq!(p.graph.slot_count(), 8);
        assert_eq!(p.meta.texts, vec!["a", "b", "c", "x", "y"]);
        assert_eq!(&p.remap[5..], &[None, None, None, None]);
        // paper -> author is the forward direction of the derived link
        let s = p.graph.out_edges(0).next().unwrap();
        assert_eq!((s.target, s.direction), (3, Direction::Forward));
    }

    #[test]
    fn chain_collapses_to_weight_sum() {
        let spec = IngestSpec::parse("table t text=x\ntable link\nfk link.a -> t.id\nfk link.b -> t.id\n")
            .unwrap();
        let mut b = GraphBuilder::new();
        let a = b.add_node(0.0, 0);
        let c = b.add_node(0.0, 0);
        let w = b.add_node(0.0, 1);
        // w -> a and w -> c, unit weights both ways
        b.add_link(w, a, 1.0, 1.0, 0.0);
        b.add_link(w, c, 1.0, 1.0, 0.0);
        let g = b.build().unwrap();
        let meta = NodeMeta {
            tables: vec!["t".into(), "link".into()],
            keys: vec!["a".into(), "c".into(), "w".into()],
            texts: vec!["a".into(), "c".into(), String::new()],
        };
        let p = prune_transitive(&g, &meta, &spec).unwrap();
        assert_eq!(p.graph.node_count(), 2);
        let s: Vec<_> = p.graph.out_edges(0).collect();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].target, s[0].weight), (1, 2.0));
    }

    #[test]
    fn no_key_only_relation_is_identity() {
        let spec = IngestSpec::parse("table t text=x\nfk t.p -> t.id\n").unwrap();
        let mut b = GraphBuilder::new();
        b.add_node(1.0, 0);
        b.add_node(1.0, 0);
        b.add_link(0, 1, 1.0, 2.0, 0.0);
        let g = b.build().unwrap();
        let meta = NodeMeta {
            tables: vec!["t".into()],
            keys: vec!["0".into(), "1".into()],
            texts: vec!["a".into(), "b".into()],
        };
        let p = prune_transitive(&g, &meta, &spec).unwrap();
        assert_eq!(p.graph, g);
        assert_eq!(p.remap, vec![Some(0), Some(1)]);
    }
}
