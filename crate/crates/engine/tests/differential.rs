//! Engine semantics: single-view runs against the sequential references,
//! differential runs across collections, difference traces, and work
//! counters.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use strata_engine::analytics::{
    build_dataflow, edges_to_rows, Algorithm, AnalyticsSpec, EDGES_INPUT, LOOP_PROBE, MSG_PROBE,
};
use strata_engine::dataflow::IterMode;
use strata_engine::oracle::scratch_oracle;
use strata_engine::row::{ints, row1, row2, Row, Value};
use strata_engine::{
    run_on_collection, run_on_view, CollectionInput, Dataflow, EngineError, ExecConfig,
};

type Edge = (u32, u32, i64);

fn cfg() -> ExecConfig {
    ExecConfig::default()
}

/// Per-view diffs for an edge-list collection given the full edge set of
/// every view.
fn collection_from_states(states: &[Vec<Edge>]) -> CollectionInput {
    let mut views = Vec::new();
    let mut prev: HashMap<Row, i64> = HashMap::new();
    for state in states {
        let mut cur: HashMap<Row, i64> = HashMap::new();
        for (row, m) in edges_to_rows(state) {
            *cur.entry(row).or_insert(0) += m;
        }
        let mut delta: Vec<(Row, i64)> = Vec::new();
        for (row, m) in &cur {
            let d = m - prev.get(row).copied().unwrap_or(0);
            if d != 0 {
                delta.push((row.clone(), d));
            }
        }
        for (row, m) in &prev {
            if !cur.contains_key(row) {
                delta.push((row.clone(), -m));
            }
        }
        delta.sort();
        views.push(delta);
        prev = cur;
    }
    CollectionInput::single(EDGES_INPUT, views)
}

fn sorted(mut rows: Vec<Row>) -> Vec<Row> {
    rows.sort();
    rows
}

/// The four-edge shortest-path example: s=0, w1=1, w2=2, w3=3.
fn base_edges() -> Vec<Edge> {
    vec![(0, 1, 2), (0, 2, 10), (1, 2, 2), (2, 3, 2)]
}

#[test]
fn sssp_single_view_distances() {
    let spec = AnalyticsSpec::new(Algorithm::Sssp).with_source(0);
    let df = build_dataflow(&spec, 4).unwrap();
    let edges = edges_to_rows(&base_edges());
    let out = run_on_view(&df, EDGES_INPUT, &edges, &cfg()).unwrap();
    assert_eq!(
        sorted(out),
        vec![
            ints(&[0, 0]),
            ints(&[1, 2]),
            ints(&[2, 4]),
            ints(&[3, 6]),
        ]
    );
}

#[test]
fn sssp_difference_trace_matches_published_example() {
    // Three versions: the base graph, then (s,w1) cost 2 -> 1, then
    // (s,w2) cost 10 -> 1.
    let spec = AnalyticsSpec::new(Algorithm::Sssp).with_source(0);
    let df = build_dataflow(&spec, 4).unwrap();
    let v0 = base_edges();
    let mut v1 = v0.clone();
    v1[0] = (0, 1, 1);
    let mut v2 = v1.clone();
    v2[1] = (0, 2, 1);
    let input = collection_from_states(&[v0, v1, v2]);
    let result = run_on_collection(&df, &input, &cfg()).unwrap();

    // Distance stream at (view 0, iteration 1): w1 and w2 leave infinity.
    let dist_trace = &result.traces[LOOP_PROBE];
    let at: Vec<(Row, i64)> = dist_trace
        .iter()
        .filter(|(t, _, _)| t == &vec![0, 1])
        .map(|(_, row, m)| (row.clone(), *m))
        .collect();
    let expect: Vec<(Row, i64)> = vec![
        (row2(Value::Int(1), Value::Int(2)), 1),
        (row2(Value::Int(1), Value::Inf), -1),
        (row2(Value::Int(2), Value::Int(10)), 1),
        (row2(Value::Int(2), Value::Inf), -1),
    ];
    assert_eq!(at, expect);

    // Messages at (view 0, iteration 0) are exactly the source's offers.
    let msgs: Vec<(Row, i64)> = result.traces[MSG_PROBE]
        .iter()
        .filter(|(t, _, _)| t == &vec![0, 0])
        .map(|(_, row, m)| (row.clone(), *m))
        .collect();
    assert_eq!(msgs, vec![(ints(&[1, 2]), 1), (ints(&[2, 10]), 1)]);

    // At (view 2, iteration 2) the distance of w2 briefly reverts in the
    // difference trace: the cheaper source offer lands one iteration before
    // the stale w1-relayed offer is withdrawn.
    let at_v2_i2: Vec<(Row, i64)> = dist_trace
        .iter()
        .filter(|(t, _, _)| t == &vec![2, 2])
        .map(|(_, row, m)| (row.clone(), *m))
        .collect();
    assert!(at_v2_i2.contains(&(ints(&[2, 10]), 1)));
    assert!(at_v2_i2.contains(&(ints(&[2, 3]), -1)));

    // After the first update, w1's accumulated distance is 1.
    let at_v1 = result.output.accumulate(1).unwrap();
    assert!(at_v1.contains(&ints(&[1, 1])));
    // And the full states stay correct at every version.
    assert_eq!(
        sorted(at_v1),
        vec![ints(&[0, 0]), ints(&[1, 1]), ints(&[2, 3]), ints(&[3, 5])]
    );
    let at_v2 = result.output.accumulate(2).unwrap();
    assert_eq!(
        sorted(at_v2),
        vec![ints(&[0, 0]), ints(&[1, 1]), ints(&[2, 1]), ints(&[3, 3])]
    );
}

#[test]
fn empty_edge_set_yields_source_only() {
    let spec = AnalyticsSpec::new(Algorithm::Bfs).with_source(5);
    let df = build_dataflow(&spec, 10).unwrap();
    let out = run_on_view(&df, EDGES_INPUT, &[], &cfg()).unwrap();
    assert_eq!(out, vec![ints(&[5, 0])]);
}

#[test]
fn wcc_two_disjoint_cliques() {
    let spec = AnalyticsSpec::new(Algorithm::Wcc);
    let df = build_dataflow(&spec, 10).unwrap();
    let edges = edges_to_rows(&[(0, 1, 1), (1, 2, 1), (5, 6, 1)]);
    let out = run_on_view(&df, EDGES_INPUT, &edges, &cfg()).unwrap();
    assert_eq!(
        sorted(out),
        vec![
            ints(&[0, 0]),
            ints(&[1, 0]),
            ints(&[2, 0]),
            ints(&[5, 5]),
            ints(&[6, 5]),
        ]
    );
}

#[test]
fn unknown_source_is_rejected() {
    let spec = AnalyticsSpec::new(Algorithm::Bfs).with_source(12);
    assert!(build_dataflow(&spec, 10).is_err());
}

fn random_graph(rng: &mut ChaCha8Rng, nodes: u32, edges: usize, max_w: i64) -> Vec<Edge> {
    (0..edges)
        .map(|_| {
            (
                rng.gen_range(0..nodes),
                rng.gen_range(0..nodes),
                rng.gen_range(1..=max_w),
            )
        })
        .collect()
}

/// Random collection: each view is a random subset of a base edge pool.
fn random_states(rng: &mut ChaCha8Rng, nodes: u32, pool: usize, views: usize) -> Vec<Vec<Edge>> {
    let base = random_graph(rng, nodes, pool, 9);
    (0..views)
        .map(|_| {
            base.iter()
                .filter(|_| rng.gen_bool(0.7))
                .copied()
                .collect()
        })
        .collect()
}

fn spec_for(rng: &mut ChaCha8Rng, algorithm: Algorithm, nodes: u32) -> AnalyticsSpec {
    match algorithm {
        Algorithm::Bfs | Algorithm::Sssp => {
            AnalyticsSpec::new(algorithm).with_source(rng.gen_range(0..nodes))
        }
        Algorithm::Mpsp => {
            let pairs = (0..3)
                .map(|_| (rng.gen_range(0..nodes), rng.gen_range(0..nodes)))
                .collect();
            AnalyticsSpec::new(algorithm).with_pairs(pairs)
        }
        _ => AnalyticsSpec::new(algorithm),
    }
}

fn assert_matches_oracle(spec: &AnalyticsSpec, got: Vec<Row>, edges: &[Edge], context: &str) {
    let expect = scratch_oracle(spec, edges);
    if spec.algorithm == Algorithm::PageRank {
        let to_map = |rows: Vec<Row>| -> HashMap<i64, f64> {
            rows.into_iter()
                .map(|r| (r[0].as_int(), r[1].as_float()))
                .collect()
        };
        let got = to_map(got);
        let expect = to_map(expect);
        assert_eq!(
            got.keys().collect::<std::collections::BTreeSet<_>>(),
            expect.keys().collect::<std::collections::BTreeSet<_>>(),
            "{context}: vertex sets differ"
        );
        for (v, r) in &expect {
            let g = got[v];
            assert!(
                (g - r).abs() <= 1e-9,
                "{context}: rank of {v} differs: {g} vs {r}"
            );
        }
    } else {
        assert_eq!(sorted(got), sorted(expect), "{context}");
    }
}

/// The central contract: accumulated differential outputs at every view
/// equal an independent from-scratch run on that view.
#[test]
fn scratch_equivalence_all_algorithms() {
    for algorithm in Algorithm::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE ^ algorithm.name().len() as u64);
        for trial in 0..12 {
            let nodes = rng.gen_range(4..=30);
            let states = random_states(&mut rng, nodes, (nodes as usize) * 2, 4);
            let spec = spec_for(&mut rng, algorithm, nodes);
            let df = build_dataflow(&spec, nodes).unwrap();
            let input = collection_from_states(&states);
            let result = run_on_collection(&df, &input, &cfg()).unwrap();
            for (v, state) in states.iter().enumerate() {
                let got = result.output.accumulate(v).unwrap();
                assert_matches_oracle(
                    &spec,
                    got,
                    state,
                    &format!("{} trial {trial} view {v}", algorithm.name()),
                );
            }
        }
    }
}

#[test]
fn identical_views_produce_no_diffs_and_no_work() {
    let edges = base_edges();
    let states: Vec<Vec<Edge>> = (0..6).map(|_| edges.clone()).collect();
    let input = collection_from_states(&states);
    for algorithm in [Algorithm::Wcc, Algorithm::Sssp, Algorithm::Scc] {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spec = spec_for(&mut rng, algorithm, 4);
        let df = build_dataflow(&spec, 4).unwrap();
        let result = run_on_collection(&df, &input, &cfg()).unwrap();
        for v in 1..states.len() {
            assert!(
                result.output.per_view[v].is_empty(),
                "{}: view {v} has output diffs",
                algorithm.name()
            );
            assert_eq!(result.work[v], 0, "{}: view {v} did work", algorithm.name());
        }
        assert!(result.work[0] > 0);
    }
}

#[test]
fn small_change_near_leaf_recomputes_little() {
    // Path 0 -> 1 -> ... -> 29; drop the last edge in the second view.
    let n = 30u32;
    let path: Vec<Edge> = (0..n - 1).map(|i| (i, i + 1, 1)).collect();
    let mut shorter = path.clone();
    shorter.pop();
    let spec = AnalyticsSpec::new(Algorithm::Bfs).with_source(0);
    let df = build_dataflow(&spec, n).unwrap();
    let input = collection_from_states(&[path, shorter]);
    let result = run_on_collection(&df, &input, &cfg()).unwrap();
    assert!(result.work[0] as u32 >= n);
    assert!(
        result.work[1] < result.work[0] / 4,
        "leaf change recomputed {} keys vs {} from scratch",
        result.work[1],
        result.work[0]
    );
}

#[test]
fn disjoint_views_recompute_at_least_scratch() {
    // Two completely disjoint graphs as consecutive views.
    let a: Vec<Edge> = (0..10).map(|i| (i, i + 1, 1)).collect();
    let b: Vec<Edge> = (20..30).map(|i| (i, i + 1, 1)).collect();
    let spec = AnalyticsSpec::new(Algorithm::Wcc);
    let df = build_dataflow(&spec, 40).unwrap();

    let joint = collection_from_states(&[a.clone(), b.clone()]);
    let result = run_on_collection(&df, &joint, &cfg()).unwrap();

    let scratch_b = run_on_collection(
        &df,
        &collection_from_states(&[b.clone()]),
        &cfg(),
    )
    .unwrap();
    assert!(
        result.work[1] >= scratch_b.work[0],
        "disjoint swap did {} work, scratch does {}",
        result.work[1],
        scratch_b.work[0]
    );
}

#[test]
fn pagerank_is_less_stable_than_bfs() {
    // One edge changes between the views; PageRank moves every rank while
    // BFS touches a few distances.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut per_seed = Vec::new();
    for _ in 0..5 {
        let nodes = 24;
        let base = random_graph(&mut rng, nodes, 60, 1);
        let mut changed = base.clone();
        changed[0] = (rng.gen_range(0..nodes), rng.gen_range(0..nodes), 1);
        let states = vec![base, changed];
        let input = collection_from_states(&states);

        let pr = build_dataflow(&AnalyticsSpec::new(Algorithm::PageRank), nodes).unwrap();
        let bfs =
            build_dataflow(&AnalyticsSpec::new(Algorithm::Bfs).with_source(0), nodes).unwrap();
        let pr_diffs = run_on_collection(&pr, &input, &cfg())
            .unwrap()
            .output
            .per_view[1]
            .len();
        let bfs_diffs = run_on_collection(&bfs, &input, &cfg())
            .unwrap()
            .output
            .per_view[1]
            .len();
        per_seed.push((pr_diffs, bfs_diffs));
    }
    let pr_total: usize = per_seed.iter().map(|p| p.0).sum();
    let bfs_total: usize = per_seed.iter().map(|p| p.1).sum();
    assert!(
        pr_total > bfs_total,
        "expected PageRank to produce more diffs: {per_seed:?}"
    );
}

#[test]
fn diverging_iteration_reports_nontermination() {
    let mut b = Dataflow::builder();
    let start = b.input(EDGES_INPUT);
    let seed = b.map(start, |_| row1(Value::Int(0)));
    let seed = b.distinct(seed);
    let spin = b.iterate(seed, IterMode::FixPoint, |b, l| {
        // Strictly increasing counter: never stabilizes.
        b.map(l, |r| row1(Value::Int(r[0].as_int() + 1)))
    });
    b.output(spin);
    let df = b.finish();
    let cfg = ExecConfig { iter_cap: 50 };
    let err = run_on_view(&df, EDGES_INPUT, &[(ints(&[0, 0, 1]), 1)], &cfg).unwrap_err();
    assert!(matches!(err, EngineError::NonTermination { cap: 50, .. }));
}

#[test]
fn accumulate_rejects_inconsistent_streams() {
    // A dataflow whose output nets to multiplicity 2 per record.
    let mut b = Dataflow::builder();
    let edges = b.input(EDGES_INPUT);
    let doubled = b.concat(&[edges, edges]);
    b.output(doubled);
    let df = b.finish();
    let input = CollectionInput::single(EDGES_INPUT, vec![vec![(ints(&[1, 2, 1]), 1)]]);
    let result = run_on_collection(&df, &input, &cfg()).unwrap();
    assert!(matches!(
        result.output.accumulate(0),
        Err(EngineError::InconsistentStream { net: 2, .. })
    ));
}

#[test]
fn fixpoint_is_sound_for_label_propagation() {
    // After the loop stabilizes, no later iteration carries differences.
    let spec = AnalyticsSpec::new(Algorithm::Wcc);
    let df = build_dataflow(&spec, 8).unwrap();
    let edges = edges_to_rows(&[(0, 1, 1), (1, 2, 1), (2, 3, 1), (4, 5, 1)]);
    let input = CollectionInput::single(EDGES_INPUT, vec![edges]);
    let result = run_on_collection(&df, &input, &cfg()).unwrap();
    let trace = &result.traces[LOOP_PROBE];
    let max_iter = trace.iter().map(|(t, _, _)| t[1]).max().unwrap();
    // The run drained naturally (no cap), so the body output at the final
    // recorded iteration already produced nothing beyond it.
    assert!(max_iter < 10);
    let at_last: Vec<_> = trace.iter().filter(|(t, _, _)| t[1] == max_iter).collect();
    assert!(!at_last.is_empty());
}

#[test]
fn scc_three_cycle_with_tail() {
    let spec = AnalyticsSpec::new(Algorithm::Scc);
    let df = build_dataflow(&spec, 5).unwrap();
    let edges = edges_to_rows(&[(0, 1, 1), (1, 2, 1), (2, 0, 1), (2, 3, 1)]);
    let out = run_on_view(&df, EDGES_INPUT, &edges, &cfg()).unwrap();
    assert_eq!(
        sorted(out),
        vec![ints(&[0, 0]), ints(&[1, 0]), ints(&[2, 0]), ints(&[3, 3])]
    );
}

#[test]
fn pagerank_ranks_sum_to_one_each_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let edges = random_graph(&mut rng, 20, 50, 1);
    let df = build_dataflow(&AnalyticsSpec::new(Algorithm::PageRank), 20).unwrap();
    let input = CollectionInput::single(EDGES_INPUT, vec![edges_to_rows(&edges)]);
    let result = run_on_collection(&df, &input, &cfg()).unwrap();
    let out = result.output.accumulate(0).unwrap();
    let total: f64 = out.iter().map(|r| r[1].as_float()).sum();
    assert!((total - 1.0).abs() < 1e-9, "final ranks sum to {total}");

    // The rank vector stays a distribution at every iteration: accumulate
    // the loop trace prefix by prefix.
    let trace = &result.traces[LOOP_PROBE];
    let max_iter = trace.iter().map(|(t, _, _)| t[1]).max().unwrap();
    for iter in 0..=max_iter {
        let mut acc: std::collections::BTreeMap<&Row, i64> = Default::default();
        for (t, row, m) in trace.iter().filter(|(t, _, _)| t[1] <= iter) {
            let _ = t;
            *acc.entry(row).or_insert(0) += m;
        }
        let total: f64 = acc
            .iter()
            .filter(|(_, m)| **m != 0)
            .map(|(row, m)| row[1].as_float() * *m as f64)
            .sum();
        assert!(
            (total - 1.0).abs() < 1e-9,
            "iteration {iter}: ranks sum to {total}"
        );
    }
}

#[test]
fn sssp_distances_satisfy_edge_relaxation() {
    // At fixpoint every edge is relaxed: d(dst) <= d(src) + cost.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let nodes = rng.gen_range(4..=40);
        let edges = random_graph(&mut rng, nodes, nodes as usize * 3, 9);
        let source = rng.gen_range(0..nodes);
        let df = build_dataflow(&AnalyticsSpec::new(Algorithm::Sssp).with_source(source), nodes)
            .unwrap();
        let out = run_on_view(&df, EDGES_INPUT, &edges_to_rows(&edges), &cfg()).unwrap();
        let dist: std::collections::HashMap<i64, Value> = out
            .iter()
            .map(|r| (r[0].as_int(), r[1].clone()))
            .collect();
        for &(s, d, w) in &edges {
            if let Value::Int(ds) = dist[&(s as i64)] {
                match &dist[&(d as i64)] {
                    Value::Int(dd) => assert!(*dd <= ds + w, "edge ({s},{d},{w})"),
                    other => panic!("reachable vertex {d} has distance {other:?}"),
                }
            }
        }
    }
}

#[test]
fn mpsp_restricts_output_to_pairs() {
    let spec = AnalyticsSpec::new(Algorithm::Mpsp).with_pairs(vec![(0, 3), (2, 0)]);
    let df = build_dataflow(&spec, 4).unwrap();
    let out = run_on_view(&df, EDGES_INPUT, &edges_to_rows(&base_edges()), &cfg()).unwrap();
    assert_eq!(
        sorted(out),
        vec![
            ints(&[0, 3, 6]),
            vec![Value::Int(2), Value::Int(0), Value::Inf],
        ]
    );
}
