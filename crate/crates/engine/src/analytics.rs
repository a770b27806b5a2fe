//! Built-in analytics dataflows: WCC, SCC (coloring), BFS, SSSP, PageRank,
//! and multiple-pair shortest paths.
//!
//! Every dataflow consumes the `edges` input stream of `[src, dst, weight]`
//! rows and outputs per-vertex (or per-pair) result rows.

use crate::dataflow::{Dataflow, DataflowBuilder, IterMode, StreamId};
use crate::row::{row1, row2, row3, Row, Value};

/// Name of the edge input stream every analytics dataflow reads.
pub const EDGES_INPUT: &str = "edges";
/// Probe name for the distance/label loop stream (where one exists).
pub const LOOP_PROBE: &str = "loop";
/// Probe name for the message stream of the shortest-path loops.
pub const MSG_PROBE: &str = "messages";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Wcc,
    Scc,
    Bfs,
    Sssp,
    PageRank,
    Mpsp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Wcc => "wcc",
            Algorithm::Scc => "scc",
            Algorithm::Bfs => "bfs",
            Algorithm::Sssp => "sssp",
            Algorithm::PageRank => "pr",
            Algorithm::Mpsp => "mpsp",
        }
    }

    pub fn parse(name: &str) -> Option<Algorithm> {
        match name {
            "wcc" => Some(Algorithm::Wcc),
            "scc" => Some(Algorithm::Scc),
            "bfs" => Some(Algorithm::Bfs),
            "sssp" => Some(Algorithm::Sssp),
            "pr" => Some(Algorithm::PageRank),
            "mpsp" => Some(Algorithm::Mpsp),
            _ => None,
        }
    }

    pub const ALL: [Algorithm; 6] = [
        Algorithm::Wcc,
        Algorithm::Scc,
        Algorithm::Bfs,
        Algorithm::Sssp,
        Algorithm::PageRank,
        Algorithm::Mpsp,
    ];
}

#[derive(Debug, Clone)]
pub struct AnalyticsSpec {
    pub algorithm: Algorithm,
    /// Source vertex for BFS/SSSP.
    pub source: Option<u32>,
    /// (src, dst) pairs for MPSP.
    pub pairs: Vec<(u32, u32)>,
    /// PageRank iteration count.
    pub iterations: u32,
    /// PageRank damping factor.
    pub damping: f64,
}

impl AnalyticsSpec {
    pub fn new(algorithm: Algorithm) -> AnalyticsSpec {
        AnalyticsSpec {
            algorithm,
            source: None,
            pairs: Vec::new(),
            iterations: 10,
            damping: 0.85,
        }
    }

    pub fn with_source(mut self, source: u32) -> AnalyticsSpec {
        self.source = Some(source);
        self
    }

    pub fn with_pairs(mut self, pairs: Vec<(u32, u32)>) -> AnalyticsSpec {
        self.pairs = pairs;
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("source vertex {vertex} is not a node of the graph (|V| = {nodes})")]
    UnknownSource { vertex: u32, nodes: u32 },
    #[error("{algorithm} requires a source vertex")]
    MissingSource { algorithm: &'static str },
    #[error("mpsp requires at least one (src, dst) pair")]
    MissingPairs,
}

fn vid(v: u32) -> Value {
    Value::Int(v as i64)
}

/// Deduplicated endpoint vertices of an edge stream of [src, dst, ...] rows.
fn endpoints(b: &mut DataflowBuilder, edges: StreamId) -> StreamId {
    let pts = b.flat_map(edges, |e| vec![row1(e[0].clone()), row1(e[1].clone())]);
    b.distinct(pts)
}

fn min_by_key_reduce(b: &mut DataflowBuilder, s: StreamId) -> StreamId {
    // Rows are [key fields..., value]; group on everything but the last
    // field and keep the minimum value.
    b.reduce(
        s,
        |row| row[..row.len() - 1].to_vec(),
        |key, group| {
            let best = group
                .iter()
                .map(|(row, _)| row.last().unwrap().clone())
                .min()
                .unwrap();
            let mut out = key.clone();
            out.push(best);
            vec![out]
        },
    )
}

/// Builds the dataflow for the requested analytics. `nodes` is the base
/// graph's node count, used to validate sources and pairs.
pub fn build_dataflow(spec: &AnalyticsSpec, nodes: u32) -> Result<Dataflow, AnalyticsError> {
    match spec.algorithm {
        Algorithm::Wcc => Ok(wcc_dataflow()),
        Algorithm::Scc => Ok(scc_dataflow()),
        Algorithm::Bfs | Algorithm::Sssp => {
            let source = spec.source.ok_or(AnalyticsError::MissingSource {
                algorithm: spec.algorithm.name(),
            })?;
            if source >= nodes {
                return Err(AnalyticsError::UnknownSource { vertex: source, nodes });
            }
            Ok(shortest_path_dataflow(
                source,
                spec.algorithm == Algorithm::Bfs,
            ))
        }
        Algorithm::PageRank => Ok(pagerank_dataflow(spec.iterations, spec.damping)),
        Algorithm::Mpsp => {
            if spec.pairs.is_empty() {
                return Err(AnalyticsError::MissingPairs);
            }
            for &(s, d) in &spec.pairs {
                if s >= nodes {
                    return Err(AnalyticsError::UnknownSource { vertex: s, nodes });
                }
                if d >= nodes {
                    return Err(AnalyticsError::UnknownSource { vertex: d, nodes });
                }
            }
            Ok(mpsp_dataflow(&spec.pairs))
        }
    }
}

/// Iterative min-label propagation over the undirected edge set. Labels
/// converge to the minimum node id of each component.
fn wcc_dataflow() -> Dataflow {
    let mut b = Dataflow::builder();
    let edges = b.input(EDGES_INPUT);
    let sym = b.flat_map(edges, |e| {
        vec![
            row2(e[0].clone(), e[1].clone()),
            row2(e[1].clone(), e[0].clone()),
        ]
    });
    let sym = b.distinct(sym);
    let verts = endpoints(&mut b, sym);
    let labels0 = b.map(verts, |v| row2(v[0].clone(), v[0].clone()));
    let labels = b.iterate(labels0, IterMode::FixPoint, |b, l| {
        b.probe(l, LOOP_PROBE);
        let e = b.enter(sym);
        let msgs = b.join(
            e,
            l,
            |e| row1(e[0].clone()),
            |l| row1(l[0].clone()),
            |_k, e, l| row2(e[1].clone(), l[1].clone()),
        );
        let all = b.concat(&[l, msgs]);
        min_by_key_reduce(b, all)
    });
    b.output(labels);
    b.finish()
}

/// Bellman-Ford over directed edges: distances start at 0 for the source and
/// the explicit infinity for everyone else; each round joins edges with
/// current distances and takes per-vertex minima.
fn shortest_path_dataflow(source: u32, unit_weights: bool) -> Dataflow {
    let mut b = Dataflow::builder();
    let raw = b.input(EDGES_INPUT);
    let edges = if unit_weights {
        b.map(raw, |e| row3(e[0].clone(), e[1].clone(), Value::Int(1)))
    } else {
        raw
    };
    let verts = endpoints(&mut b, edges);
    let inf = b.map(verts, |v| row2(v[0].clone(), Value::Inf));
    let src = b.constant(vec![(row2(vid(source), Value::Int(0)), 1)]);
    let both = b.concat(&[inf, src]);
    let init = min_by_key_reduce(&mut b, both);
    let dists = b.iterate(init, IterMode::FixPoint, |b, d| {
        b.probe(d, LOOP_PROBE);
        let e = b.enter(edges);
        let msgs = b.join(
            e,
            d,
            |e| row1(e[0].clone()),
            |d| row1(d[0].clone()),
            |_k, e, d| match &d[1] {
                Value::Int(dist) => row2(e[1].clone(), Value::Int(dist + e[2].as_int())),
                _ => row2(e[1].clone(), Value::Inf),
            },
        );
        // Unreached vertices send nothing.
        let msgs = b.filter(msgs, |m| !m[1].is_inf());
        b.probe(msgs, MSG_PROBE);
        let all = b.concat(&[d, msgs]);
        min_by_key_reduce(b, all)
    });
    b.output(dists);
    b.finish()
}

/// Multi-source labeled Bellman-Ford restricted to the requested pairs.
/// Output rows are [src, dst, distance].
fn mpsp_dataflow(pairs: &[(u32, u32)]) -> Dataflow {
    let mut b = Dataflow::builder();
    let edges = b.input(EDGES_INPUT);
    let verts = endpoints(&mut b, edges);

    let mut sources: Vec<u32> = pairs.iter().map(|&(s, _)| s).collect();
    sources.sort_unstable();
    sources.dedup();
    let srcs = b.constant(sources.iter().map(|&s| (row1(vid(s)), 1)).collect());

    // Every (vertex, source) pair starts unreached; sources reach themselves
    // at distance 0. Requested pairs are seeded explicitly so each one always
    // has a result, even when its endpoint is outside the current view.
    let inf = b.join(
        verts,
        srcs,
        |_| Vec::new(),
        |_| Vec::new(),
        |_k, v, s| row3(v[0].clone(), s[0].clone(), Value::Inf),
    );
    let zero = b.map(srcs, |s| row3(s[0].clone(), s[0].clone(), Value::Int(0)));
    let pair_inf = b.constant(
        pairs
            .iter()
            .map(|&(s, d)| (row3(vid(d), vid(s), Value::Inf), 1))
            .collect(),
    );
    let both = b.concat(&[inf, zero, pair_inf]);
    let init = min_by_key_reduce(&mut b, both);

    let dists = b.iterate(init, IterMode::FixPoint, |b, d| {
        let e = b.enter(edges);
        let msgs = b.join(
            e,
            d,
            |e| row1(e[0].clone()),
            |d| row1(d[0].clone()),
            |_k, e, d| match &d[2] {
                Value::Int(dist) => row3(
                    e[1].clone(),
                    d[1].clone(),
                    Value::Int(dist + e[2].as_int()),
                ),
                _ => row3(e[1].clone(), d[1].clone(), Value::Inf),
            },
        );
        let msgs = b.filter(msgs, |m| !m[2].is_inf());
        let all = b.concat(&[d, msgs]);
        min_by_key_reduce(b, all)
    });
    let wanted: Vec<(i64, i64)> = pairs
        .iter()
        .map(|&(s, d)| (s as i64, d as i64))
        .collect();
    let filtered = b.filter(dists, move |r| {
        wanted.contains(&(r[1].as_int(), r[0].as_int()))
    });
    let out = b.map(filtered, |r| row3(r[1].clone(), r[0].clone(), r[2].clone()));
    b.output(out);
    b.finish()
}

/// Fixed-iteration PageRank with uniform redistribution of dangling mass.
fn pagerank_dataflow(iterations: u32, damping: f64) -> Dataflow {
    let unit = || Value::Int(0);
    let mut b = Dataflow::builder();
    let raw = b.input(EDGES_INPUT);
    let edges = b.map(raw, |e| row2(e[0].clone(), e[1].clone()));
    let edges = b.distinct(edges);
    let verts = endpoints(&mut b, edges);

    let keyed_verts = b.map(verts, move |v| row2(unit(), v[0].clone()));
    let n = b.reduce(
        keyed_verts,
        |_| Vec::new(),
        move |_k, group| {
            let count: i64 = group.iter().map(|(_, m)| m).sum();
            vec![row2(unit(), Value::Int(count))]
        },
    );
    let degs = {
        let outs = b.map(edges, |e| row1(e[0].clone()));
        b.reduce(
            outs,
            |r| r.clone(),
            |key, group| {
                let count: i64 = group.iter().map(|(_, m)| m).sum();
                vec![row2(key[0].clone(), Value::Int(count))]
            },
        )
    };
    // Vertices with no outgoing edges.
    let with_out = b.join(
        verts,
        degs,
        |v| row1(v[0].clone()),
        |d| row1(d[0].clone()),
        |_k, v, _d| row1(v[0].clone()),
    );
    let neg = b.negate(with_out);
    let dangling = b.concat(&[verts, neg]);

    let ranks0 = b.join(
        verts,
        n,
        |_| Vec::new(),
        |_| Vec::new(),
        |_k, v, n| row2(v[0].clone(), Value::float(1.0 / n[1].as_int() as f64)),
    );

    let zero_mass = b.constant(vec![(row2(unit(), Value::float(0.0)), 1)]);

    let ranks = b.iterate(ranks0, IterMode::Fixed(iterations), move |b, r| {
        b.probe(r, LOOP_PROBE);
        let e = b.enter(edges);
        let degs = b.enter(degs);
        let n = b.enter(n);
        let dangling = b.enter(dangling);
        let verts = b.enter(verts);
        let zero_mass = b.enter(zero_mass);

        let r_deg = b.join(
            r,
            degs,
            |r| row1(r[0].clone()),
            |d| row1(d[0].clone()),
            |_k, r, d| row3(r[0].clone(), r[1].clone(), d[1].clone()),
        );
        let contrib = b.join(
            e,
            r_deg,
            |e| row1(e[0].clone()),
            |r| row1(r[0].clone()),
            |_k, e, r| {
                row2(
                    e[1].clone(),
                    Value::float(r[1].as_float() / r[2].as_int() as f64),
                )
            },
        );
        let zero_in = b.map(verts, |v| row2(v[0].clone(), Value::float(0.0)));
        let in_all = b.concat(&[contrib, zero_in]);
        let insum = b.reduce(
            in_all,
            |r| row1(r[0].clone()),
            |key, group| {
                let total: f64 = group
                    .iter()
                    .map(|(row, m)| row[1].as_float() * *m as f64)
                    .sum();
                vec![row2(key[0].clone(), Value::float(total))]
            },
        );

        let dang_rank = b.join(
            dangling,
            r,
            |d| row1(d[0].clone()),
            |r| row1(r[0].clone()),
            move |_k, _d, r| row2(unit(), r[1].clone()),
        );
        let dm_all = b.concat(&[dang_rank, zero_mass]);
        let dm = b.reduce(
            dm_all,
            |_| Vec::new(),
            move |_k, group| {
                let total: f64 = group
                    .iter()
                    .map(|(row, m)| row[1].as_float() * *m as f64)
                    .sum();
                vec![row2(unit(), Value::float(total))]
            },
        );
        let ndm = b.join(
            n,
            dm,
            |_| Vec::new(),
            |_| Vec::new(),
            |_k, n, dm| row3(n[0].clone(), n[1].clone(), dm[1].clone()),
        );
        b.join(
            insum,
            ndm,
            |_| Vec::new(),
            |_| Vec::new(),
            move |_k, s, ndm| {
                let n = ndm[1].as_int() as f64;
                let rank =
                    (1.0 - damping) / n + damping * (s[1].as_float() + ndm[2].as_float() / n);
                row2(s[0].clone(), Value::float(rank))
            },
        )
    });
    b.output(ranks);
    b.finish()
}

/// Doubly-iterative coloring: the outer loop alternates min-color forward
/// propagation with backward reachability inside each color region, retires
/// completed components, and recurses on the remaining vertices and edges.
fn scc_dataflow() -> Dataflow {
    const EDGE: i64 = 0;
    const DONE: i64 = 1;
    const VERT: i64 = 2;
    let mut b = Dataflow::builder();
    let raw = b.input(EDGES_INPUT);
    let pairs = b.map(raw, |e| row2(e[0].clone(), e[1].clone()));
    let pairs = b.distinct(pairs);
    let verts0 = endpoints(&mut b, pairs);
    let tagged_edges0 = b.map(pairs, |e| row3(Value::Int(EDGE), e[0].clone(), e[1].clone()));
    let tagged_verts0 = b.map(verts0, |v| row3(Value::Int(VERT), v[0].clone(), v[0].clone()));
    let tagged0 = b.concat(&[tagged_edges0, tagged_verts0]);

    let finished = b.iterate(tagged0, IterMode::FixPoint, |b, s| {
        let live_tagged = b.filter(s, |r| r[0].as_int() == EDGE);
        let live = b.map(live_tagged, |r| row2(r[1].clone(), r[2].clone()));
        let live_verts_tagged = b.filter(s, |r| r[0].as_int() == VERT);
        let verts = b.map(live_verts_tagged, |r| row1(r[1].clone()));
        let done_prev = b.filter(s, |r| r[0].as_int() == DONE);

        let colors0 = b.map(verts, |v| row2(v[0].clone(), v[0].clone()));
        let colors = b.iterate(colors0, IterMode::FixPoint, |b, c| {
            let e = b.enter(live);
            let msgs = b.join(
                e,
                c,
                |e| row1(e[0].clone()),
                |c| row1(c[0].clone()),
                |_k, e, c| row2(e[1].clone(), c[1].clone()),
            );
            let all = b.concat(&[c, msgs]);
            min_by_key_reduce(b, all)
        });

        // Roots: vertices whose color is themselves. The backward pass walks
        // edges in reverse within one color region.
        let roots = b.filter(colors, |c| c[0] == c[1]);
        let members = b.iterate(roots, IterMode::FixPoint, |b, m| {
            let e = b.enter(live);
            let c = b.enter(colors);
            let cand = b.join(
                e,
                m,
                |e| row1(e[1].clone()),
                |m| row1(m[0].clone()),
                |_k, e, m| row2(e[0].clone(), m[1].clone()),
            );
            let checked = b.join(
                cand,
                c,
                |x| row1(x[0].clone()),
                |c| row1(c[0].clone()),
                |_k, x, c| row3(x[0].clone(), x[1].clone(), c[1].clone()),
            );
            let within = b.filter(checked, |r| r[1] == r[2]);
            let grown = b.map(within, |r| row2(r[0].clone(), r[1].clone()));
            let all = b.concat(&[m, grown]);
            b.distinct(all)
        });

        let new_done = b.map(members, |m| {
            row3(Value::Int(DONE), m[0].clone(), m[1].clone())
        });

        // Retired vertices leave the vertex set, and edges with either
        // endpoint retired leave the edge set:
        // live - hit_src - hit_dst + hit_both.
        let member_v = b.map(members, |m| row1(m[0].clone()));
        let member_v = b.distinct(member_v);
        let hit_src = b.join(
            live,
            member_v,
            |e| row1(e[0].clone()),
            |v| row1(v[0].clone()),
            |_k, e, _v| e.clone(),
        );
        let hit_dst = b.join(
            live,
            member_v,
            |e| row1(e[1].clone()),
            |v| row1(v[0].clone()),
            |_k, e, _v| e.clone(),
        );
        let hit_both = b.join(
            hit_src,
            member_v,
            |e| row1(e[1].clone()),
            |v| row1(v[0].clone()),
            |_k, e, _v| e.clone(),
        );
        let neg_src = b.negate(hit_src);
        let neg_dst = b.negate(hit_dst);
        let remaining = b.concat(&[live, neg_src, neg_dst, hit_both]);
        let remaining_tagged = b.map(remaining, |e| {
            row3(Value::Int(EDGE), e[0].clone(), e[1].clone())
        });

        let retired = b.join(
            verts,
            member_v,
            |v| row1(v[0].clone()),
            |v| row1(v[0].clone()),
            |_k, v, _m| v.clone(),
        );
        let neg_retired = b.negate(retired);
        let remaining_verts = b.concat(&[verts, neg_retired]);
        let remaining_verts_tagged = b.map(remaining_verts, |v| {
            row3(Value::Int(VERT), v[0].clone(), v[0].clone())
        });

        b.concat(&[remaining_tagged, remaining_verts_tagged, done_prev, new_done])
    });

    let done = b.filter(finished, |r| r[0].as_int() == DONE);
    let out = b.map(done, |r| row2(r[1].clone(), r[2].clone()));
    b.output(out);
    b.finish()
}

/// Converts a weighted edge list into the engine's input rows.
pub fn edges_to_rows(edges: &[(u32, u32, i64)]) -> Vec<(Row, i64)> {
    edges
        .iter()
        .map(|&(s, d, w)| (row3(vid(s), vid(d), Value::Int(w)), 1))
        .collect()
}
