//! Immutable property graph loaded from CSV node/edge files.
//!
//! Node and edge IDs are dense `u32` values assigned in file order. External
//! node IDs from the input files are remapped and the mapping is retained so
//! callers can emit an `.idmap` file next to a registered graph.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::value::{PropType, PropertyValue};

pub type NodeId = u32;
pub type EdgeId = u32;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("missing file: {0}")]
    MissingFile(PathBuf),
    #[error("schema error in {file}: {message}")]
    SchemaError { file: PathBuf, message: String },
    #[error("row {row} of {file}: edge references unknown node id {external}")]
    DanglingEdge {
        file: PathBuf,
        row: usize,
        external: u64,
    },
    #[error("row {row}, column `{column}` of {file}: {message}")]
    ValueParseError {
        file: PathBuf,
        row: usize,
        column: String,
        message: String,
    },
    #[error("row {row} of {file}: duplicate node id {external}")]
    DuplicateNodeId {
        file: PathBuf,
        row: usize,
        external: u64,
    },
    #[error("csv error in {file}: {source}")]
    Csv {
        file: PathBuf,
        source: csv::Error,
    },
    #[error("io error on {file}: {source}")]
    Io {
        file: PathBuf,
        source: std::io::Error,
    },
}

/// Declared property columns, in file order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schema {
    pub props: Vec<(String, PropType)>,
}

impl Schema {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.props.iter().position(|(n, _)| n == name)
    }

    pub fn type_of(&self, name: &str) -> Option<PropType> {
        self.props
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| *t)
    }

    pub fn len(&self) -> usize {
        self.props.len()
    }

    pub fn is_empty(&self) -> bool {
        self.props.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRecord {
    pub nid: NodeId,
    /// Values aligned with the node schema; never missing a column.
    pub props: Vec<PropertyValue>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub eid: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    /// Values aligned with the edge schema.
    pub props: Vec<PropertyValue>,
}

/// An immutable property graph: a node stream plus an edge stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyGraph {
    pub node_schema: Schema,
    pub edge_schema: Schema,
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    /// internal node id -> external id from the input file.
    external_ids: Vec<u64>,
}

impl PropertyGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, nid: NodeId) -> &NodeRecord {
        &self.nodes[nid as usize]
    }

    pub fn edge(&self, eid: EdgeId) -> &EdgeRecord {
        &self.edges[eid as usize]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeRecord> {
        self.nodes.iter()
    }

    /// Deterministic iteration in edge-ID order.
    pub fn edge_stream(&self) -> impl Iterator<Item = &EdgeRecord> {
        self.edges.iter()
    }

    pub fn external_id(&self, nid: NodeId) -> u64 {
        self.external_ids[nid as usize]
    }

    pub fn node_prop(&self, nid: NodeId, slot: usize) -> &PropertyValue {
        &self.nodes[nid as usize].props[slot]
    }

    pub fn edge_prop(&self, eid: EdgeId, slot: usize) -> &PropertyValue {
        &self.edges[eid as usize].props[slot]
    }

    /// Builds a graph directly from records. Used by aggregate views and tests;
    /// external ids are the dense ids themselves.
    pub fn from_parts(
        node_schema: Schema,
        edge_schema: Schema,
        nodes: Vec<NodeRecord>,
        edges: Vec<EdgeRecord>,
    ) -> Result<PropertyGraph, String> {
        for (i, n) in nodes.iter().enumerate() {
            if n.nid as usize != i {
                return Err(format!("node {i} has non-dense id {}", n.nid));
            }
            if n.props.len() != node_schema.len() {
                return Err(format!("node {i} does not conform to the node schema"));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e.eid as usize != i {
                return Err(format!("edge {i} has non-dense id {}", e.eid));
            }
            if e.props.len() != edge_schema.len() {
                return Err(format!("edge {i} does not conform to the edge schema"));
            }
            if e.src as usize >= nodes.len() || e.dst as usize >= nodes.len() {
                return Err(format!("edge {i} references a missing node"));
            }
        }
        let external_ids = (0..nodes.len() as u64).collect();
        Ok(PropertyGraph {
            node_schema,
            edge_schema,
            nodes,
            edges,
            external_ids,
        })
    }

    /// Writes the graph back out in the same CSV format it is loaded from.
    /// External ids are preserved so a reload reproduces the same graph.
    pub fn dump(&self, node_file: &Path, edge_file: &Path) -> Result<(), GraphError> {
        let io_err = |file: &Path, source| GraphError::Io {
            file: file.to_path_buf(),
            source,
        };
        let mut out = String::from("id:uint");
        for (name, ty) in &self.node_schema.props {
            out.push_str(&format!(",{name}:{ty}"));
        }
        out.push('\n');
        for n in &self.nodes {
            out.push_str(&self.external_ids[n.nid as usize].to_string());
            for v in &n.props {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        std::fs::write(node_file, out).map_err(|e| io_err(node_file, e))?;

        let mut out = String::from("src:uint,dst:uint");
        for (name, ty) in &self.edge_schema.props {
            out.push_str(&format!(",{name}:{ty}"));
        }
        out.push('\n');
        for e in &self.edges {
            out.push_str(&format!(
                "{},{}",
                self.external_ids[e.src as usize], self.external_ids[e.dst as usize]
            ));
            for v in &e.props {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        std::fs::write(edge_file, out).map_err(|e| io_err(edge_file, e))
    }
}

impl fmt::Display for PropertyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "graph(|V|={}, |E|={})",
            self.node_count(),
            self.edge_count()
        )
    }
}

fn reader_for(path: &Path) -> Result<csv::Reader<std::fs::File>, GraphError> {
    if !path.exists() {
        return Err(GraphError::MissingFile(path.to_path_buf()));
    }
    let file = std::fs::File::open(path).map_err(|e| GraphError::Io {
        file: path.to_path_buf(),
        source: e,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(file))
}

/// Splits a `name:type` header cell.
fn parse_header_cell(cell: &str, file: &Path) -> Result<(String, String), GraphError> {
    match cell.split_once(':') {
        Some((name, ty)) if !name.is_empty() && !ty.is_empty() => {
            Ok((name.trim().to_string(), ty.trim().to_string()))
        }
        _ => Err(GraphError::SchemaError {
            file: file.to_path_buf(),
            message: format!("header cell `{cell}` is not of the form name:type"),
        }),
    }
}

fn parse_prop_schema(
    cells: &[&str],
    file: &Path,
) -> Result<Schema, GraphError> {
    let mut props = Vec::with_capacity(cells.len());
    for cell in cells {
        let (name, ty) = parse_header_cell(cell, file)?;
        let ty = PropType::parse(&ty).ok_or_else(|| GraphError::SchemaError {
            file: file.to_path_buf(),
            message: format!("unknown type `{ty}` for column `{name}`"),
        })?;
        if props.iter().any(|(n, _): &(String, _)| *n == name) {
            return Err(GraphError::SchemaError {
                file: file.to_path_buf(),
                message: format!("duplicate column `{name}`"),
            });
        }
        props.push((name, ty));
    }
    Ok(Schema { props })
}

/// Loads a property graph from a nodes CSV and an edges CSV.
///
/// Nodes: `id:uint` then typed property columns. Edges: `src:uint,dst:uint`
/// then typed property columns, with src/dst given as external node ids.
pub fn load_graph(node_file: &Path, edge_file: &Path) -> Result<PropertyGraph, GraphError> {
    // Nodes.
    let mut rdr = reader_for(node_file)?;
    let headers = rdr
        .headers()
        .map_err(|e| GraphError::Csv {
            file: node_file.to_path_buf(),
            source: e,
        })?
        .clone();
    let cells: Vec<&str> = headers.iter().collect();
    if cells.is_empty() {
        return Err(GraphError::SchemaError {
            file: node_file.to_path_buf(),
            message: "empty header".into(),
        });
    }
    let (id_name, id_ty) = parse_header_cell(cells[0], node_file)?;
    if id_name != "id" || id_ty != "uint" {
        return Err(GraphError::SchemaError {
            file: node_file.to_path_buf(),
            message: format!("first node column must be id:uint, got `{}`", cells[0]),
        });
    }
    let node_schema = parse_prop_schema(&cells[1..], node_file)?;

    let mut nodes = Vec::new();
    let mut external_ids = Vec::new();
    let mut id_map: HashMap<u64, NodeId> = HashMap::new();
    for (idx, rec) in rdr.records().enumerate() {
        let row = idx + 2; // 1-based, after the header line
        let rec = rec.map_err(|e| GraphError::Csv {
            file: node_file.to_path_buf(),
            source: e,
        })?;
        if rec.len() != 1 + node_schema.len() {
            return Err(GraphError::SchemaError {
                file: node_file.to_path_buf(),
                message: format!(
                    "row {row} has {} cells, expected {}",
                    rec.len(),
                    1 + node_schema.len()
                ),
            });
        }
        let external: u64 =
            rec[0]
                .trim()
                .parse()
                .map_err(|_| GraphError::ValueParseError {
                    file: node_file.to_path_buf(),
                    row,
                    column: "id".into(),
                    message: format!("`{}` is not a uint", &rec[0]),
                })?;
        if id_map.contains_key(&external) {
            return Err(GraphError::DuplicateNodeId {
                file: node_file.to_path_buf(),
                row,
                external,
            });
        }
        let nid = nodes.len() as NodeId;
        let mut props = Vec::with_capacity(node_schema.len());
        for (slot, (name, ty)) in node_schema.props.iter().enumerate() {
            let raw = &rec[1 + slot];
            let v = PropertyValue::parse_typed(raw, *ty).map_err(|message| {
                GraphError::ValueParseError {
                    file: node_file.to_path_buf(),
                    row,
                    column: name.clone(),
                    message,
                }
            })?;
            props.push(v);
        }
        id_map.insert(external, nid);
        external_ids.push(external);
        nodes.push(NodeRecord { nid, props });
    }

    // Edges.
    let mut rdr = reader_for(edge_file)?;
    let headers = rdr
        .headers()
        .map_err(|e| GraphError::Csv {
            file: edge_file.to_path_buf(),
            source: e,
        })?
        .clone();
    let cells: Vec<&str> = headers.iter().collect();
    if cells.len() < 2 || cells[0] != "src:uint" || cells[1] != "dst:uint" {
        return Err(GraphError::SchemaError {
            file: edge_file.to_path_buf(),
            message: "edge header must start with src:uint,dst:uint".into(),
        });
    }
    let edge_schema = parse_prop_schema(&cells[2..], edge_file)?;

    let mut edges = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let row = idx + 2;
        let rec = rec.map_err(|e| GraphError::Csv {
            file: edge_file.to_path_buf(),
            source: e,
        })?;
        if rec.len() != 2 + edge_schema.len() {
            return Err(GraphError::SchemaError {
                file: edge_file.to_path_buf(),
                message: format!(
                    "row {row} has {} cells, expected {}",
                    rec.len(),
                    2 + edge_schema.len()
                ),
            });
        }
        let endpoint = |cell: &str, col: &str| -> Result<NodeId, GraphError> {
            let external: u64 = cell
                .trim()
                .parse()
                .map_err(|_| GraphError::ValueParseError {
                    file: edge_file.to_path_buf(),
                    row,
                    column: col.into(),
                    message: format!("`{cell}` is not a uint"),
                })?;
            id_map
                .get(&external)
                .copied()
                .ok_or(GraphError::DanglingEdge {
                    file: edge_file.to_path_buf(),
                    row,
                    external,
                })
        };
        let src = endpoint(&rec[0], "src")?;
        let dst = endpoint(&rec[1], "dst")?;
        let eid = edges.len() as EdgeId;
        let mut props = Vec::with_capacity(edge_schema.len());
        for (slot, (name, ty)) in edge_schema.props.iter().enumerate() {
            let raw = &rec[2 + slot];
            let v = PropertyValue::parse_typed(raw, *ty).map_err(|message| {
                GraphError::ValueParseError {
                    file: edge_file.to_path_buf(),
                    row,
                    column: name.clone(),
                    message,
                }
            })?;
            props.push(v);
        }
        edges.push(EdgeRecord {
            eid,
            src,
            dst,
            props,
        });
    }

    Ok(PropertyGraph {
        node_schema,
        edge_schema,
        nodes,
        edges,
        external_ids,
    })
}
