//! Tab-separated table ingestion.
//!
//! Schema file grammar, one statement per line (`#` starts a comment):
//!
//! ```text
//! table <name> [key=<col>] [text=<col>,<col>...] [prestige=<col>]
//! fk <table>.<col> -> <table>.<col>
//! weight <forward-default>
//! ```
//!
//! Each table is read from `<data>/<name>.tsv`; the first row names the
//! columns. The key column defaults to the first column.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{DataGraph, DegreeMode, Direction, GraphBuilder, NodeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub name: String,
    pub key: Option<String>,
    pub text_columns: Vec<String>,
    pub prestige_column: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForeignKey {
    pub from_table: String,
    pub from_column: String,
    pub to_table: String,
    pub to_column: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestSpec {
    pub tables: Vec<TableSpec>,
    pub foreign_keys: Vec<ForeignKey>,
    pub forward_weight_default: f32,
}

impl Default for IngestSpec {
    fn default() -> Self {
        Self {
            tables: Vec::new(),
            foreign_keys: Vec::new(),
            forward_weight_default: 1.0,
        }
    }
}

impl IngestSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = IngestSpec::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Schema {
                line: line_no,
                message,
            };
            let mut words = line.split_whitespace();
            match words.next() {
                Some("table") => {
                    let name = words
                        .next()
                        .ok_or_else(|| err("table needs a name".into()))?
                        .to_string();
                    let mut table = TableSpec {
                        name,
                        key: None,
                        text_columns: Vec::new(),
                        prestige_column: None,
                    };
                    for attr in words {
                        let (k, v) = attr
                            .split_once('=')
                            .ok_or_else(|| err(format!("expected key=value, got `{attr}`")))?;
                        match k {
                            "key" => table.key = Some(v.to_string()),
                            "text" => {
                                table.text_columns = v
                                    .split(',')
                                    .filter(|c| !c.is_empty())
                                    .map(str::to_string)
                                    .collect()
                            }
                            "prestige" => table.prestige_column = Some(v.to_string()),
                            other => return Err(err(format!("unknown table attribute `{other}`"))),
                        }
                    }
                    if spec.tables.iter().any(|t| t.name == table.name) {
                        return Err(err(format!("duplicate table `{}`", table.name)));
                    }
                    spec.tables.push(table);
                }
                Some("fk") => {
                    let rest: Vec<&str> = words.collect();
                    let (from, to) = match rest.as_slice() {
                        [from, "->", to] => (*from, *to),
                        _ => return Err(err("expected `fk <t>.<c> -> <t>.<c>`".into())),
                    };
                    let split = |s: &str| {
                        s.split_once('.')
                            .map(|(t, c)| (t.to_string(), c.to_string()))
                            .ok_or_else(|| err(format!("expected <table>.<column>, got `{s}`")))
                    };
                    let (from_table, from_column) = split(from)?;
                    let (to_table, to_column) = split(to)?;
                    spec.foreign_keys.push(ForeignKey {
                        from_table,
                        from_column,
                        to_table,
                        to_column,
                    });
                }
                Some("weight") => {
                    let w: f32 = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| err("weight needs a number".into()))?;
                    if !(w > 0.0) || !w.is_finite() {
                        return Err(err("forward weight must be positive".into()));
                    }
                    spec.forward_weight_default = w;
                }
                Some(other) => return Err(err(format!("unknown statement `{other}`"))),
                None => {}
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.tables.iter().enumerate() {
            if self.tables[..i].iter().any(|o| o.name == t.name) {
                return Err(Error::Config(format!("duplicate table `{}`", t.name)));
            }
        }
        for fk in &self.foreign_keys {
            for t in [&fk.from_table, &fk.to_table] {
                if self.table_index(t).is_none() {
                    return Err(Error::Config(format!(
                        "foreign key references undeclared table `{t}`"
                    )));
                }
            }
        }
        if self.tables.len() > u16::MAX as usize {
            return Err(Error::Config("too many tables".into()));
        }
        Ok(())
    }

    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.name == name)
    }

    /// Relations with no text of their own that nothing references: pure link tables.
    pub fn key_only_tables(&self) -> Vec<usize> {
        self.tables
            .iter()
            .enumerate()
            .filter(|(_, t)| {
                t.text_columns.is_empty()
                    && !self.foreign_keys.iter().any(|fk| fk.to_table == t.name)
                    && self.foreign_keys.iter().any(|fk| fk.from_table == t.name)
            })
            .map(|(i, _)| i)
            .collect()
    }
}

/// Rows of one table, as read from its file.
#[derive(Debug, Clone, PartialEq)]
pub struct TableData {
    pub source: PathBuf,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TableData {
    pub fn parse(source: impl Into<PathBuf>, text: &str) -> Result<Self> {
        let source = source.into();
        let mut lines = text.lines().enumerate();
        let columns: Vec<String> = match lines.next() {
            Some((_, header)) => header.split('\t').map(str::to_string).collect(),
            None => {
                return Ok(Self {
                    source,
                    columns: Vec::new(),
                    rows: Vec::new(),
                })
            }
        };
        let mut rows = Vec::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
            if fields.len() != columns.len() {
                return Err(Error::MalformedRow {
                    path: source.clone(),
                    line: idx + 1,
                    message: format!("expected {} fields, found {}", columns.len(), fields.len()),
                });
            }
            rows.push(fields);
        }
        Ok(Self {
            source,
            columns,
            rows,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text)
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MalformedRow {
                path: self.source.clone(),
                line: 1,
                message: format!("no column `{name}`"),
            })
    }
}

/// Per-node descriptive data kept beside the graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeMeta {
    pub tables: Vec<String>,
    pub keys: Vec<String>,
    pub texts: Vec<String>,
}

impl NodeMeta {
    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub graph: DataGraph,
    pub meta: NodeMeta,
    pub warnings: Vec<String>,
}

/// Reads `<data_dir>/<table>.tsv` for every declared table and builds the graph.
pub fn ingest(spec: &IngestSpec, data_dir: &Path) -> Result<Ingested> {
    let tables = spec
        .tables
        .iter()
        .map(|t| TableData::read(&data_dir.join(format!("{}.tsv", t.name))))
        .collect::<Result<Vec<_>>>()?;
    ingest_tables(spec, &tables)
}

/// Builds the graph from already-parsed tables, given in `spec.tables` order.
///
/// One node per row. One link per resolved foreign-key value. Prestige comes
/// from the prestige column when declared, otherwise the node's in-degree.
/// Backward weights are assigned with [`assign_backward_weights`].
pub fn ingest_tables(spec: &IngestSpec, tables: &[TableData]) -> Result<Ingested> {
    spec.validate()?;
    if tables.len() != spec.tables.len() {
        return Err(Error::Config(format!(
            "{} tables declared but {} provided",
            spec.tables.len(),
            tables.len()
        )));
    }

    let mut builder = GraphBuilder::new();
    let mut meta = NodeMeta {
        tables: spec.tables.iter().map(|t| t.name.clone()).collect(),
        ..NodeMeta::default()
    };
    let mut first_node = Vec::with_capacity(tables.len());
    let mut explicit_prestige = vec![false; tables.len()];

    for (ti, (tspec, data)) in spec.tables.iter().zip(tables).enumerate() {
        first_node.push(builder.node_count() as NodeId);
        if data.columns.is_empty() {
            continue;
        }
        let key_col = match &tspec.key {
            Some(k) => data.column(k)?,
            None => 0,
        };
        let text_cols = tspec
            .text_columns
            .iter()
            .map(|c| data.column(c))
            .collect::<Result<Vec<_>>>()?;
        let prestige_col = tspec
            .prestige_column
            .as_deref()
            .map(|c| data.column(c))
            .transpose()?;
        explicit_prestige[ti] = prestige_col.is_some();

        for (ri, row) in data.rows.iter().enumerate() {
            let prestige = match prestige_col {
                Some(c) => row[c]
                    .trim()
                    .parse::<f32>()
                    .ok()
                    .filter(|p| *p >= 0.0 && p.is_finite())
                    .ok_or_else(|| Error::MalformedRow {
                        path: data.source.clone(),
                        line: ri + 2,
                        message: format!("bad prestige value `{}`", row[c]),
                    })?,
                None => 0.0,
            };
            builder.add_node(prestige, ti as u16);
            meta.keys.push(row[key_col].clone());
            let text: Vec<&str> = text_cols
                .iter()
                .map(|&c| row[c].as_str())
                .filter(|s| !s.is_empty())
                .collect();
            meta.texts.push(text.join(" "));
        }
    }

    let w = spec.forward_weight_default;
    let mut warnings = Vec::new();
    let mut lookups: HashMap<(usize, usize), HashMap<&str, NodeId>> = HashMap::new();
    for fk in &spec.foreign_keys {
        let from_t = spec.table_index(&fk.from_table).expect("validated");
        let to_t = spec.table_index(&fk.to_table).expect("validated");
        let (from_data, to_data) = (&tables[from_t], &tables[to_t]);
        if from_data.columns.is_empty() || to_data.columns.is_empty() {
            continue;
        }
        let from_col = from_data.column(&fk.from_column)?;
        let to_col = to_data.column(&fk.to_column)?;
        if !lookups.contains_key(&(to_t, to_col)) {
            let mut map = HashMap::with_capacity(to_data.rows.len());
            for (ri, row) in to_data.rows.iter().enumerate() {
                let node = first_node[to_t] + ri as NodeId;
                if map.insert(row[to_col].as_str(), node).is_some() {
                    return Err(Error::MalformedRow {
                        path: to_data.source.clone(),
                        line: ri + 2,
                        message: format!(
                            "duplicate value `{}` in referenced column `{}`",
                            row[to_col], fk.to_column
                        ),
                    });
                }
            }
            lookups.insert((to_t, to_col), map);
        }
        let map = &lookups[&(to_t, to_col)];
        for (ri, row) in from_data.rows.iter().enumerate() {
            let value = row[from_col].as_str();
            if value.is_empty() {
                continue;
            }
            match map.get(value) {
                Some(&target) => {
                    builder.add_link(first_node[from_t] + ri as NodeId, target, w, w, 1.0)
                }
                None => warnings.push(format!(
                    "{}:{}: dangling reference {}.{} = `{}` -> {}.{}; edge skipped",
                    from_data.source.display(),
                    ri + 2,
                    fk.from_table,
                    fk.from_column,
                    value,
                    fk.to_table,
                    fk.to_column
                )),
            }
        }
    }

    let graph = builder.build()?;
    let graph = assign_backward_weights(&graph, w)?;

    // default prestige: in-degree
    let mut parts = graph.to_parts();
    for n in 0..graph.node_count() {
        if !explicit_prestige[graph.node_types()[n] as usize] {
            parts.prestige[n] = graph.degree(n as NodeId, DegreeMode::In) as f32;
        }
    }
    let graph = DataGraph::from_parts(parts)?;

    Ok(Ingested {
        graph,
        meta,
        warnings,
    })
}

/// Sets every backward slot `v -> u` to `max(ln(1 + inDegree(u)), floor)`.
pub fn assign_backward_weights(g: &DataGraph, floor: f32) -> Result<DataGraph> {
    let mut weight = g.weights().to_vec();
    for v in 0..g.node_count() as NodeId {
        for s in g.slot_range(v) {
            if g.directions().get(s) == Direction::Backward {
                let u = g.adjacent()[s];
                let d = g.degree(u, DegreeMode::In) as f64;
                weight[s] = ((1.0 + d).ln() as f32).max(floor);
            }
        }
    }
    g.with_weights(weight)
}
