//! Independent sequential reference implementations used to check the
//! dataflow analytics. Textbook algorithms over plain edge lists; nothing
//! here touches the differential machinery.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::analytics::{Algorithm, AnalyticsSpec};
use crate::row::{row2, row3, Row, Value};

/// Distance map: `None` encodes unreached (the engine's explicit infinity).
pub type Dist = Option<i64>;

fn endpoint_vertices(edges: &[(u32, u32, i64)]) -> BTreeSet<u32> {
    edges.iter().flat_map(|&(s, d, _)| [s, d]).collect()
}

/// Connected components over the undirected closure; every vertex maps to
/// the minimum vertex id in its component.
pub fn wcc(edges: &[(u32, u32, i64)]) -> BTreeMap<u32, u32> {
    let verts = endpoint_vertices(edges);
    let mut parent: BTreeMap<u32, u32> = verts.iter().map(|&v| (v, v)).collect();
    fn find(parent: &mut BTreeMap<u32, u32>, v: u32) -> u32 {
        let p = parent[&v];
        if p == v {
            v
        } else {
            let root = find(parent, p);
            parent.insert(v, root);
            root
        }
    }
    for &(s, d, _) in edges {
        let (a, b) = (find(&mut parent, s), find(&mut parent, d));
        if a != b {
            // Union by min id keeps labels canonical as we go.
            let (lo, hi) = (a.min(b), a.max(b));
            parent.insert(hi, lo);
        }
    }
    verts.iter().map(|&v| (v, find(&mut parent, v))).collect()
}

/// Strongly connected components via iterative Tarjan; every vertex maps to
/// the minimum vertex id in its component.
pub fn scc(edges: &[(u32, u32, i64)]) -> BTreeMap<u32, u32> {
    let verts: Vec<u32> = endpoint_vertices(edges).into_iter().collect();
    let index_of: BTreeMap<u32, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = verts.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(s, d, _) in edges {
        adj[index_of[&s]].push(index_of[&d]);
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }

    let mut index = vec![usize::MAX; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut comp_of = vec![usize::MAX; n];
    let mut comp_count = 0usize;

    // Explicit DFS frames: (vertex, next child position).
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut child)) = frames.last_mut() {
            if *child == 0 {
                index[v] = next_index;
                lowlink[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *child < adj[v].len() {
                let w = adj[v][*child];
                *child += 1;
                if index[w] == usize::MAX {
                    frames.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&mut (parent, _)) = frames.last_mut() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp_of[w] = comp_count;
                        if w == v {
                            break;
                        }
                    }
                    comp_count += 1;
                }
            }
        }
    }

    let mut min_member: Vec<u32> = vec![u32::MAX; comp_count];
    for (i, &c) in comp_of.iter().enumerate() {
        min_member[c] = min_member[c].min(verts[i]);
    }
    verts
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, min_member[comp_of[i]]))
        .collect()
}

/// Dijkstra from `source` over directed edges; `weight_of` selects unit
/// weights for BFS hop counts. Covers endpoint vertices plus the source.
pub fn shortest_paths(
    edges: &[(u32, u32, i64)],
    source: u32,
    unit_weights: bool,
) -> BTreeMap<u32, Dist> {
    let mut verts = endpoint_vertices(edges);
    verts.insert(source);
    let mut adj: BTreeMap<u32, Vec<(u32, i64)>> = BTreeMap::new();
    for &(s, d, w) in edges {
        adj.entry(s)
            .or_default()
            .push((d, if unit_weights { 1 } else { w }));
    }
    let mut dist: BTreeMap<u32, Dist> = verts.iter().map(|&v| (v, None)).collect();
    let mut heap: BinaryHeap<std::cmp::Reverse<(i64, u32)>> = BinaryHeap::new();
    dist.insert(source, Some(0));
    heap.push(std::cmp::Reverse((0, source)));
    while let Some(std::cmp::Reverse((d, v))) = heap.pop() {
        if dist[&v] != Some(d) {
            continue;
        }
        if let Some(out) = adj.get(&v) {
            for &(w, c) in out {
                let cand = d + c;
                if dist[&w].map_or(true, |cur| cand < cur) {
                    dist.insert(w, Some(cand));
                    heap.push(std::cmp::Reverse((cand, w)));
                }
            }
        }
    }
    dist
}

/// Power iteration matching the dataflow's semantics exactly: fixed
/// iteration count, dangling mass redistributed uniformly, duplicate edges
/// collapsed.
pub fn pagerank(
    edges: &[(u32, u32, i64)],
    iterations: u32,
    damping: f64,
) -> BTreeMap<u32, f64> {
    let dedup: BTreeSet<(u32, u32)> = edges.iter().map(|&(s, d, _)| (s, d)).collect();
    let verts: Vec<u32> = endpoint_vertices(edges).into_iter().collect();
    let n = verts.len();
    if n == 0 {
        return BTreeMap::new();
    }
    let index_of: BTreeMap<u32, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut out_deg = vec![0usize; n];
    for &(s, _) in &dedup {
        out_deg[index_of[&s]] += 1;
    }
    let mut ranks = vec![1.0 / n as f64; n];
    for _ in 0..iterations {
        let mut incoming = vec![0.0f64; n];
        for &(s, d) in &dedup {
            let si = index_of[&s];
            incoming[index_of[&d]] += ranks[si] / out_deg[si] as f64;
        }
        let dangling_mass: f64 = (0..n)
            .filter(|&i| out_deg[i] == 0)
            .map(|i| ranks[i])
            .sum();
        let nf = n as f64;
        for i in 0..n {
            ranks[i] = (1.0 - damping) / nf + damping * (incoming[i] + dangling_mass / nf);
        }
    }
    verts.iter().enumerate().map(|(i, &v)| (v, ranks[i])).collect()
}

/// Per-pair shortest distances via one Dijkstra per distinct source.
pub fn mpsp(edges: &[(u32, u32, i64)], pairs: &[(u32, u32)]) -> BTreeMap<(u32, u32), Dist> {
    let mut by_source: BTreeMap<u32, BTreeMap<u32, Dist>> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for &(s, d) in pairs {
        let dists = by_source
            .entry(s)
            .or_insert_with(|| shortest_paths(edges, s, false));
        out.insert((s, d), dists.get(&d).copied().flatten());
    }
    out
}

fn dist_value(d: Dist) -> Value {
    match d {
        Some(v) => Value::Int(v),
        None => Value::Inf,
    }
}

/// Reference results in the engine's output row format, for direct multiset
/// comparison against accumulated dataflow outputs.
pub fn scratch_oracle(spec: &AnalyticsSpec, edges: &[(u32, u32, i64)]) -> Vec<Row> {
    let vid = |v: u32| Value::Int(v as i64);
    match spec.algorithm {
        Algorithm::Wcc => wcc(edges)
            .into_iter()
            .map(|(v, l)| row2(vid(v), vid(l)))
            .collect(),
        Algorithm::Scc => scc(edges)
            .into_iter()
            .map(|(v, l)| row2(vid(v), vid(l)))
            .collect(),
        Algorithm::Bfs | Algorithm::Sssp => {
            let source = spec.source.expect("source required");
            let unit = spec.algorithm == Algorithm::Bfs;
            let mut dists = shortest_paths(edges, source, unit);
            // Views lacking the source entirely still report it at distance 0.
            dists.entry(source).or_insert(Some(0));
            dists
                .into_iter()
                .map(|(v, d)| row2(vid(v), dist_value(d)))
                .collect()
        }
        Algorithm::PageRank => pagerank(edges, spec.iterations, spec.damping)
            .into_iter()
            .map(|(v, r)| row2(vid(v), Value::float(r)))
            .collect(),
        Algorithm::Mpsp => {
            let per_pair = mpsp(edges, &spec.pairs);
            spec.pairs
                .iter()
                .map(|&(s, d)| row3(vid(s), vid(d), dist_value(per_pair[&(s, d)])))
                .collect()
        }
    }
}
