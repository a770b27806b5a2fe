//! Synthetic benchmark generators: a graph plus a view-collection statement
//! reproducing each workload shape at configurable scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use strata_graph::{EdgeRecord, NodeRecord, PropType, PropertyGraph, PropertyValue, Schema};

#[derive(Debug, Clone)]
pub enum BenchSpec {
    /// Nested views: each one extends the previous time window by `width`.
    ExpandingWindow {
        views: usize,
        width: i64,
        nodes: u32,
        edges: usize,
    },
    /// Pairwise-disjoint views: the window slides completely each step.
    SlidingWindow {
        views: usize,
        width: i64,
        nodes: u32,
        edges: usize,
    },
    /// One view per k-subset of the n largest communities, each removing
    /// those communities' vertices (and their edges).
    CommunityRemoval {
        communities: usize,
        remove: usize,
        community_size: u32,
        intra_edges: usize,
        inter_edges: usize,
    },
    /// A base view followed by views that randomly add and delete edges.
    RandomChurn {
        views: usize,
        base_edges: usize,
        adds: usize,
        dels: usize,
        nodes: u32,
    },
    /// Cartesian shape: per window segment, an expanding attribute window;
    /// the segment boundary is a full slide.
    SegmentedExpansion {
        segments: i64,
        expansions: i64,
        nodes: u32,
        edges: usize,
    },
}

pub struct Generated {
    pub graph: PropertyGraph,
    pub collection_gvdl: String,
}

fn n_choose_k(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(n_choose_k(n, k));
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn plain_nodes(n: u32) -> (Schema, Vec<NodeRecord>) {
    let schema = Schema { props: vec![] };
    let nodes = (0..n)
        .map(|nid| NodeRecord { nid, props: vec![] })
        .collect();
    (schema, nodes)
}

pub fn generate(spec: &BenchSpec, name: &str, graph_name: &str, seed: u64) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec {
        BenchSpec::ExpandingWindow {
            views,
            width,
            nodes,
            edges,
        } => {
            let horizon = width * *views as i64;
            let (node_schema, node_recs) = plain_nodes(*nodes);
            let edge_schema = Schema {
                props: vec![("t".into(), PropType::Int)],
            };
            let edge_recs = (0..*edges)
                .map(|i| EdgeRecord {
                    eid: i as u32,
                    src: rng.gen_range(0..*nodes),
                    dst: rng.gen_range(0..*nodes),
                    props: vec![PropertyValue::Int(rng.gen_range(0..horizon))],
                })
                .collect();
            let graph =
                PropertyGraph::from_parts(node_schema, edge_schema, node_recs, edge_recs).unwrap();
            let mut views_text = Vec::new();
            for i in 0..*views {
                let bound = width * (i as i64 + 1);
                views_text.push(format!("[W{i}: t < {bound}]"));
            }
            Generated {
                graph,
                collection_gvdl: format!(
                    "create view collection {name} on {graph_name} {}",
                    views_text.join(", ")
                ),
            }
        }
        BenchSpec::SlidingWindow {
            views,
            width,
            nodes,
            edges,
        } => {
            let horizon = width * *views as i64;
            let (node_schema, node_recs) = plain_nodes(*nodes);
            let edge_schema = Schema {
                props: vec![("t".into(), PropType::Int)],
            };
            let edge_recs = (0..*edges)
                .map(|i| EdgeRecord {
                    eid: i as u32,
                    src: rng.gen_range(0..*nodes),
                    dst: rng.gen_range(0..*nodes),
                    props: vec![PropertyValue::Int(rng.gen_range(0..horizon))],
                })
                .collect();
            let graph =
                PropertyGraph::from_parts(node_schema, edge_schema, node_recs, edge_recs).unwrap();
            let mut views_text = Vec::new();
            for i in 0..*views {
                let lo = width * i as i64;
                let hi = width * (i as i64 + 1);
                views_text.push(format!("[W{i}: t >= {lo} and t < {hi}]"));
            }
            Generated {
                graph,
                collection_gvdl: format!(
                    "create view collection {name} on {graph_name} {}",
                    views_text.join(", ")
                ),
            }
        }
        BenchSpec::CommunityRemoval {
            communities,
            remove,
            community_size,
            intra_edges,
            inter_edges,
        } => {
            let n = *communities as u32 * community_size;
            let node_schema = Schema {
                props: vec![("comm".into(), PropType::Int)],
            };
            let node_recs = (0..n)
                .map(|nid| NodeRecord {
                    nid,
                    props: vec![PropertyValue::Int((nid / community_size) as i64)],
                })
                .collect();
            let edge_schema = Schema { props: vec![] };
            let mut edge_recs = Vec::with_capacity(intra_edges + inter_edges);
            for _ in 0..*intra_edges {
                let c = rng.gen_range(0..*communities as u32);
                let base = c * community_size;
                edge_recs.push(EdgeRecord {
                    eid: edge_recs.len() as u32,
                    src: base + rng.gen_range(0..*community_size),
                    dst: base + rng.gen_range(0..*community_size),
                    props: vec![],
                });
            }
            for _ in 0..*inter_edges {
                edge_recs.push(EdgeRecord {
                    eid: edge_recs.len() as u32,
                    src: rng.gen_range(0..n),
                    dst: rng.gen_range(0..n),
                    props: vec![],
                });
            }
            let graph =
                PropertyGraph::from_parts(node_schema, edge_schema, node_recs, edge_recs).unwrap();
            let mut views_text = Vec::new();
            for subset in subsets(*communities, *remove) {
                let vname = format!(
                    "RM-{}",
                    subset
                        .iter()
                        .map(|c| c.to_string())
                        .collect::<Vec<_>>()
                        .join("-")
                );
                let pred = subset
                    .iter()
                    .map(|c| format!("src.comm != {c} and dst.comm != {c}"))
                    .collect::<Vec<_>>()
                    .join(" and ");
                views_text.push(format!("[{vname}: {pred}]"));
            }
            Generated {
                graph,
                collection_gvdl: format!(
                    "create view collection {name} on {graph_name} {}",
                    views_text.join(", ")
                ),
            }
        }
        BenchSpec::RandomChurn {
            views,
            base_edges,
            adds,
            dels,
            nodes,
        } => {
            assert!(*views >= 1, "churn collections need at least one view");
            // Membership per view is materialized as one bool column per
            // view; churn is applied to the member set between views.
            let total = base_edges + adds * (views - 1);
            let endpoints: Vec<(u32, u32)> = (0..total)
                .map(|_| (rng.gen_range(0..*nodes), rng.gen_range(0..*nodes)))
                .collect();
            let mut member: Vec<bool> = (0..total).map(|i| i < *base_edges).collect();
            let mut membership: Vec<Vec<bool>> = vec![member.clone()];
            let mut next_unused = *base_edges;
            for _ in 1..*views {
                for _ in 0..*dels {
                    let present: Vec<usize> =
                        (0..total).filter(|&i| member[i]).collect();
                    if present.is_empty() {
                        break;
                    }
                    member[present[rng.gen_range(0..present.len())]] = false;
                }
                for _ in 0..*adds {
                    if next_unused < total {
                        member[next_unused] = true;
                        next_unused += 1;
                    }
                }
                membership.push(member.clone());
            }
            let (node_schema, node_recs) = plain_nodes(*nodes);
            let edge_schema = Schema {
                props: (0..*views)
                    .map(|v| (format!("v{v}"), PropType::Bool))
                    .collect(),
            };
            let edge_recs = (0..total)
                .map(|i| EdgeRecord {
                    eid: i as u32,
                    src: endpoints[i].0,
                    dst: endpoints[i].1,
                    props: membership
                        .iter()
                        .map(|m| PropertyValue::Bool(m[i]))
                        .collect(),
                })
                .collect();
            let graph =
                PropertyGraph::from_parts(node_schema, edge_schema, node_recs, edge_recs).unwrap();
            let views_text: Vec<String> = (0..*views)
                .map(|v| format!("[C{v}: v{v} = true]"))
                .collect();
            Generated {
                graph,
                collection_gvdl: format!(
                    "create view collection {name} on {graph_name} {}",
                    views_text.join(", ")
                ),
            }
        }
        BenchSpec::SegmentedExpansion {
            segments,
            expansions,
            nodes,
            edges,
        } => {
            let (node_schema, node_recs) = plain_nodes(*nodes);
            let edge_schema = Schema {
                props: vec![
                    ("seg".into(), PropType::Int),
                    ("level".into(), PropType::Int),
                ],
            };
            let edge_recs = (0..*edges)
                .map(|i| EdgeRecord {
                    eid: i as u32,
                    src: rng.gen_range(0..*nodes),
                    dst: rng.gen_range(0..*nodes),
                    props: vec![
                        PropertyValue::Int(rng.gen_range(0..*segments)),
                        PropertyValue::Int(rng.gen_range(0..*expansions)),
                    ],
                })
                .collect();
            let graph =
                PropertyGraph::from_parts(node_schema, edge_schema, node_recs, edge_recs).unwrap();
            let mut views_text = Vec::new();
            for s in 0..*segments {
                for x in 0..*expansions {
                    views_text.push(format!("[S{s}X{x}: seg = {s} and level <= {x}]"));
                }
            }
            Generated {
                graph,
                collection_gvdl: format!(
                    "create view collection {name} on {graph_name} {}",
                    views_text.join(", ")
                ),
            }
        }
    }
}
