//! Aggregate (summary) views: group nodes into super-nodes and aggregate the
//! edges between groups into super-edges.

use std::collections::BTreeMap;

use crate::gvdl::{eval_node_predicate, BoundAggFunc, BoundAggregate, BoundGrouping};
use crate::store::{EdgeRecord, NodeId, NodeRecord, PropertyGraph, Schema};
use crate::value::{PropType, PropertyValue};

/// Key identifying a super-node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupKey {
    /// Values of the group-by properties, in declaration order.
    Props(Vec<PropertyValue>),
    /// Index into the ordered predicate list.
    Index(usize),
}

impl GroupKey {
    pub fn display(&self) -> String {
        match self {
            GroupKey::Props(vals) => vals
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("|"),
            GroupKey::Index(i) => format!("group-{i}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuperNode {
    pub key: GroupKey,
    pub members: Vec<NodeId>,
    /// Aggregate values aligned with the definition's node aggregates.
    pub aggs: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct SuperEdge {
    pub src_group: usize,
    pub dst_group: usize,
    /// Number of base edges in this bucket.
    pub edge_count: usize,
    /// Aggregate values aligned with the definition's edge aggregates.
    pub aggs: Vec<i64>,
}

/// The materialized summary: super-nodes in deterministic (sorted key) order
/// and directed super-edges between them.
#[derive(Debug, Clone)]
pub struct SummaryGraph {
    pub def_name: String,
    pub node_agg_names: Vec<String>,
    pub edge_agg_names: Vec<String>,
    pub super_nodes: Vec<SuperNode>,
    pub super_edges: Vec<SuperEdge>,
    /// Count of base nodes that mapped to some group.
    pub grouped_nodes: usize,
    /// Count of base edges with both endpoints grouped.
    pub grouped_edges: usize,
}

impl SummaryGraph {
    pub fn super_edge(&self, src: usize, dst: usize) -> Option<&SuperEdge> {
        self.super_edges
            .iter()
            .find(|e| e.src_group == src && e.dst_group == dst)
    }

    pub fn group_index(&self, key: &GroupKey) -> Option<usize> {
        self.super_nodes.iter().position(|n| &n.key == key)
    }

    /// Converts the summary into an ordinary property graph so further
    /// analytics can run on it and it can be stored in the CSV format.
    pub fn to_property_graph(&self) -> PropertyGraph {
        let mut node_props: Vec<(String, PropType)> = vec![("group-key".into(), PropType::Str)];
        for name in &self.node_agg_names {
            node_props.push((name.clone(), PropType::Int));
        }
        let node_schema = Schema { props: node_props };

        let mut edge_props: Vec<(String, PropType)> = Vec::new();
        for name in &self.edge_agg_names {
            edge_props.push((name.clone(), PropType::Int));
        }
        let edge_schema = Schema { props: edge_props };

        let nodes = self
            .super_nodes
            .iter()
            .enumerate()
            .map(|(i, sn)| {
                let mut props = vec![PropertyValue::Str(sn.key.display())];
                props.extend(sn.aggs.iter().map(|v| PropertyValue::Int(*v)));
                NodeRecord {
                    nid: i as u32,
                    props,
                }
            })
            .collect();
        let edges = self
            .super_edges
            .iter()
            .enumerate()
            .map(|(i, se)| EdgeRecord {
                eid: i as u32,
                src: se.src_group as u32,
                dst: se.dst_group as u32,
                props: se.aggs.iter().map(|v| PropertyValue::Int(*v)).collect(),
            })
            .collect();
        PropertyGraph::from_parts(node_schema, edge_schema, nodes, edges)
            .expect("summary graph is well formed")
    }
}

/// Materializes an aggregate view over a base graph.
///
/// Nodes that map to no group are excluded together with their incident
/// edges. Super-edges are directed by default; `symmetrize` folds (i, j) and
/// (j, i) buckets together under (min, max).
pub fn materialize_aggregate(
    g: &PropertyGraph,
    def: &BoundAggregate,
    symmetrize: bool,
) -> SummaryGraph {
    // Assign each node to at most one group key.
    let mut assignment: Vec<Option<GroupKey>> = vec![None; g.node_count()];
    match &def.grouping {
        BoundGrouping::ByProps(slots) => {
            for n in g.nodes() {
                let key: Vec<PropertyValue> =
                    slots.iter().map(|s| n.props[*s].clone()).collect();
                assignment[n.nid as usize] = Some(GroupKey::Props(key));
            }
        }
        BoundGrouping::ByPredicates(preds) => {
            for n in g.nodes() {
                // First matching predicate wins; non-matching nodes stay
                // unassigned and are dropped.
                for (i, p) in preds.iter().enumerate() {
                    if eval_node_predicate(p, n) {
                        assignment[n.nid as usize] = Some(GroupKey::Index(i));
                        break;
                    }
                }
            }
        }
    }

    // Deterministic group indices: sorted by group key.
    let mut groups: BTreeMap<GroupKey, Vec<NodeId>> = BTreeMap::new();
    for n in g.nodes() {
        if let Some(key) = &assignment[n.nid as usize] {
            groups.entry(key.clone()).or_default().push(n.nid);
        }
    }
    let index_of: BTreeMap<GroupKey, usize> = groups
        .keys()
        .enumerate()
        .map(|(i, k)| (k.clone(), i))
        .collect();

    let mut grouped_nodes = 0usize;
    let super_nodes: Vec<SuperNode> = groups
        .iter()
        .map(|(key, members)| {
            grouped_nodes += members.len();
            let aggs = def
                .node_aggs
                .iter()
                .map(|a| match &a.func {
                    BoundAggFunc::Count => members.len() as i64,
                    BoundAggFunc::Sum(slot) => members
                        .iter()
                        .map(|&nid| g.node_prop(nid, *slot).as_int().unwrap_or(0))
                        .sum(),
                })
                .collect();
            SuperNode {
                key: key.clone(),
                members: members.clone(),
                aggs,
            }
        })
        .collect();

    // Bucket edges by (group(src), group(dst)); commutative-associative
    // merges, so the result is independent of edge partitioning.
    let mut buckets: BTreeMap<(usize, usize), (usize, Vec<i64>)> = BTreeMap::new();
    let mut grouped_edges = 0usize;
    for e in g.edge_stream() {
        let (Some(sk), Some(dk)) = (
            assignment[e.src as usize].as_ref(),
            assignment[e.dst as usize].as_ref(),
        ) else {
            continue;
        };
        let mut si = index_of[sk];
        let mut di = index_of[dk];
        if symmetrize && si > di {
            std::mem::swap(&mut si, &mut di);
        }
        grouped_edges += 1;
        let entry = buckets
            .entry((si, di))
            .or_insert_with(|| (0, vec![0; def.edge_aggs.len()]));
        entry.0 += 1;
        for (slot_out, a) in def.edge_aggs.iter().enumerate() {
            match &a.func {
                BoundAggFunc::Count => entry.1[slot_out] += 1,
                BoundAggFunc::Sum(slot) => {
                    entry.1[slot_out] += e.props[*slot].as_int().unwrap_or(0)
                }
            }
        }
    }
    let super_edges = buckets
        .into_iter()
        .map(|((src_group, dst_group), (edge_count, aggs))| SuperEdge {
            src_group,
            dst_group,
            edge_count,
            aggs,
        })
        .collect();

    SummaryGraph {
        def_name: def.name.clone(),
        node_agg_names: def.node_aggs.iter().map(|a| a.out_name.clone()).collect(),
        edge_agg_names: def.edge_aggs.iter().map(|a| a.out_name.clone()).collect(),
        super_nodes,
        super_edges,
        grouped_nodes,
        grouped_edges,
    }
}
