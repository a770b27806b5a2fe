//! End-to-end tests for CSV loading, predicate binding/evaluation, and
//! aggregate views, built around the phone-call example graph.

use strata_graph::gvdl::{self, BindError, BoundStatement, PredContext};
use strata_graph::{load_graph, materialize_aggregate, GraphError, PropertyValue};

pub const CALLS_NODES: &str = "\
id:uint,city:string,profession:string
1,LA,Engineer
2,LA,Doctor
3,LA,Engineer
4,NY,Lawyer
5,NY,Doctor
6,LA,Engineer
7,NY,Lawyer
8,LA,Lawyer
";

pub const CALLS_EDGES: &str = "\
src:uint,dst:uint,duration:int,year:int
5,2,7,2015
2,5,19,2019
8,7,13,2019
8,7,18,2019
8,5,6,2019
5,4,18,2019
4,3,32,2017
2,3,1,2010
1,5,10,2018
1,2,3,2019
1,2,12,2017
6,5,7,2018
5,6,2,2013
6,1,4,2019
5,7,34,2019
";

fn write_files(dir: &tempfile::TempDir, nodes: &str, edges: &str) -> (std::path::PathBuf, std::path::PathBuf) {
    let np = dir.path().join("nodes.csv");
    let ep = dir.path().join("edges.csv");
    std::fs::write(&np, nodes).unwrap();
    std::fs::write(&ep, edges).unwrap();
    (np, ep)
}

fn calls_graph() -> strata_graph::PropertyGraph {
    let dir = tempfile::tempdir().unwrap();
    let (np, ep) = write_files(&dir, CALLS_NODES, CALLS_EDGES);
    load_graph(&np, &ep).unwrap()
}

#[test]
fn loads_call_graph() {
    let g = calls_graph();
    assert_eq!(g.node_count(), 8);
    assert_eq!(g.edge_count(), 15);
    // External id 5 maps to internal id 4 (file order) and is a NY doctor.
    let nid = (0..8).find(|&i| g.external_id(i) == 5).unwrap();
    let n = g.node(nid);
    assert_eq!(n.props[0], PropertyValue::Str("NY".into()));
    assert_eq!(n.props[1], PropertyValue::Str("Doctor".into()));
    // Edge ids are dense and in file order.
    let first = g.edge_stream().next().unwrap();
    assert_eq!(first.eid, 0);
    assert_eq!(g.external_id(first.src), 5);
    assert_eq!(g.external_id(first.dst), 2);
    for e in g.edge_stream() {
        assert!((e.src as usize) < g.node_count());
        assert!((e.dst as usize) < g.node_count());
    }
}

#[test]
fn loading_is_deterministic() {
    let a = calls_graph();
    let b = calls_graph();
    assert_eq!(a, b);
}

#[test]
fn empty_edge_file_gives_empty_edge_stream() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = "id:uint,label:string\n10,a\n11,b\n12,c\n";
    let edges = "src:uint,dst:uint\n";
    let (np, ep) = write_files(&dir, nodes, edges);
    let g = load_graph(&np, &ep).unwrap();
    assert_eq!(g.node_count(), 3);
    assert_eq!(g.edge_count(), 0);
    assert_eq!(g.edge_stream().count(), 0);
}

#[test]
fn dangling_edge_reports_row() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = "id:uint\n0\n1\n2\n3\n4\n5\n6\n7\n";
    let edges = "src:uint,dst:uint\n0,1\n2,999\n";
    let (np, ep) = write_files(&dir, nodes, edges);
    match load_graph(&np, &ep) {
        Err(GraphError::DanglingEdge { row, external, .. }) => {
            assert_eq!(row, 3);
            assert_eq!(external, 999);
        }
        other => panic!("expected DanglingEdge, got {other:?}"),
    }
}

#[test]
fn duplicate_node_id_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = "id:uint\n7\n7\n";
    let edges = "src:uint,dst:uint\n";
    let (np, ep) = write_files(&dir, nodes, edges);
    assert!(matches!(
        load_graph(&np, &ep),
        Err(GraphError::DuplicateNodeId { external: 7, .. })
    ));
}

#[test]
fn bad_value_reports_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = "id:uint,age:int\n0,12\n1,twelve\n";
    let edges = "src:uint,dst:uint\n";
    let (np, ep) = write_files(&dir, nodes, edges);
    match load_graph(&np, &ep) {
        Err(GraphError::ValueParseError { row, column, .. }) => {
            assert_eq!(row, 3);
            assert_eq!(column, "age");
        }
        other => panic!("expected ValueParseError, got {other:?}"),
    }
}

#[test]
fn missing_file_and_bad_header() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let edges = dir.path().join("edges.csv");
    std::fs::write(&edges, "src:uint,dst:uint\n").unwrap();
    assert!(matches!(
        load_graph(&missing, &edges),
        Err(GraphError::MissingFile(_))
    ));

    let nodes = dir.path().join("nodes.csv");
    std::fs::write(&nodes, "id,city:string\n0,LA\n").unwrap();
    assert!(matches!(
        load_graph(&nodes, &edges),
        Err(GraphError::SchemaError { .. })
    ));
    std::fs::write(&nodes, "id:uint,city:float\n0,1.5\n").unwrap();
    assert!(matches!(
        load_graph(&nodes, &edges),
        Err(GraphError::SchemaError { .. })
    ));
}

#[test]
fn comment_lines_are_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = "id:uint\n# a comment\n0\n1\n";
    let edges = "src:uint,dst:uint\n# another\n0,1\n";
    let (np, ep) = write_files(&dir, nodes, edges);
    let g = load_graph(&np, &ep).unwrap();
    assert_eq!(g.node_count(), 2);
    assert_eq!(g.edge_count(), 1);
}

#[test]
fn dump_then_reload_roundtrips() {
    let g = calls_graph();
    let dir = tempfile::tempdir().unwrap();
    let np = dir.path().join("out_nodes.csv");
    let ep = dir.path().join("out_edges.csv");
    g.dump(&np, &ep).unwrap();
    let g2 = load_graph(&np, &ep).unwrap();
    assert_eq!(g, g2);
}

#[test]
fn bind_rejects_unknown_property_and_type_mismatches() {
    let g = calls_graph();
    // The example long-calls view mentions `state`, which this graph lacks.
    let stmt = gvdl::parse(
        "create view CA-Long-Calls on Calls edges where src.state = 'CA' \
         and dst.state = 'CA' and duration > 10 and year = 2019",
    )
    .unwrap();
    match gvdl::bind(&stmt, &g) {
        Err(BindError::UnknownProperty(p)) => assert_eq!(p, "state"),
        other => panic!("expected UnknownProperty, got {other:?}"),
    }

    let stmt = gvdl::parse("create view V on Calls edges where src.city < 5").unwrap();
    assert!(matches!(gvdl::bind(&stmt, &g), Err(BindError::TypeMismatch { .. })));

    // Ordering operators are rejected on bool operands.
    let stmt = gvdl::parse("create view V on Calls edges where true < false").unwrap();
    assert!(matches!(gvdl::bind(&stmt, &g), Err(BindError::OrderingOnBool)));

    // int-typed comparison binds fine.
    let stmt = gvdl::parse("create view V on Calls edges where duration > 10").unwrap();
    assert!(gvdl::bind(&stmt, &g).is_ok());
}

#[test]
fn eval_predicate_on_edge_ids_and_properties() {
    let g = calls_graph();
    let bound = |text: &str| -> gvdl::BoundPred {
        let stmt = gvdl::parse(&format!("create view V on Calls edges where {text}")).unwrap();
        match gvdl::bind(&stmt, &g).unwrap() {
            BoundStatement::View(v) => v.predicate,
            _ => unreachable!(),
        }
    };

    let lt100 = bound("ID < 100");
    let range = bound("ID >= 50 and ID < 199");
    let taut = bound("ID >= 0");
    // Edge id 3 is the second 8->7 call.
    let e = g.edge(3);
    assert!(gvdl::eval_predicate(&lt100, e, &g));
    assert!(!gvdl::eval_predicate(&range, e, &g));
    assert!(gvdl::eval_predicate(&taut, e, &g));

    // src/dst property access: calls out of NY in 2019.
    let ny2019 = bound("src.city = 'NY' and year = 2019");
    let matching: Vec<u32> = g
        .edge_stream()
        .filter(|e| gvdl::eval_predicate(&ny2019, e, &g))
        .map(|e| e.eid)
        .collect();
    // Edges 5 (5->4) and 14 (5->7) are the 2019 calls out of node 5 (NY).
    assert_eq!(matching, vec![5, 14]);

    // Evaluation is pure: repeated calls agree.
    for e in g.edge_stream() {
        assert_eq!(
            gvdl::eval_predicate(&range, e, &g),
            gvdl::eval_predicate(&range, e, &g)
        );
    }
}

#[test]
fn de_morgan_holds_on_randomized_predicates() {
    let g = calls_graph();
    // A tiny deterministic generator over comparison atoms.
    let atoms = [
        "ID < 7",
        "duration > 10",
        "year = 2019",
        "src.city = 'NY'",
        "dst.profession = 'Lawyer'",
        "ID >= 3 and ID < 12",
    ];
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for _ in 0..200 {
        let a = atoms[(next() % atoms.len() as u64) as usize];
        let b = atoms[(next() % atoms.len() as u64) as usize];
        let make = |text: String| {
            let stmt = gvdl::parse(&format!("create view V on C edges where {text}")).unwrap();
            match gvdl::bind(&stmt, &g).unwrap() {
                BoundStatement::View(v) => v.predicate,
                _ => unreachable!(),
            }
        };
        let not_and = make(format!("not (({a}) and ({b}))"));
        let or_nots = make(format!("(not ({a})) or (not ({b}))"));
        for e in g.edge_stream() {
            assert_eq!(
                gvdl::eval_predicate(&not_and, e, &g),
                gvdl::eval_predicate(&or_nots, e, &g)
            );
        }
    }
}

#[test]
fn city_calls_city_aggregate() {
    let g = calls_graph();
    let stmt = gvdl::parse(
        "create view City-Calls-City on Calls \
         nodes group by city aggregate num-phones: count(*) \
         edges aggregate total-duration: sum(duration)",
    )
    .unwrap();
    let BoundStatement::Aggregate(def) = gvdl::bind(&stmt, &g).unwrap() else {
        panic!("expected an aggregate statement");
    };
    let summary = materialize_aggregate(&g, &def, false);

    assert_eq!(summary.super_nodes.len(), 2);
    let la = summary
        .group_index(&strata_graph::GroupKey::Props(vec![PropertyValue::Str("LA".into())]))
        .unwrap();
    let ny = summary
        .group_index(&strata_graph::GroupKey::Props(vec![PropertyValue::Str("NY".into())]))
        .unwrap();
    assert_eq!(summary.super_nodes[la].aggs, vec![5]);
    assert_eq!(summary.super_nodes[ny].aggs, vec![3]);

    let dur = |s: usize, d: usize| summary.super_edge(s, d).unwrap().aggs[0];
    assert_eq!(dur(la, ny), 73);
    assert_eq!(dur(ny, la), 41);
    assert_eq!(dur(la, la), 20);
    assert_eq!(dur(ny, ny), 52);

    // Mass conservation: every edge is grouped, so the super-edge sums cover
    // the full duration total.
    let total: i64 = summary.super_edges.iter().map(|e| e.aggs[0]).sum();
    let base: i64 = g
        .edge_stream()
        .map(|e| e.props[0].as_int().unwrap())
        .sum();
    assert_eq!(total, base);
    assert_eq!(base, 186);
    let count_total: usize = summary.super_edges.iter().map(|e| e.edge_count).sum();
    assert_eq!(count_total, summary.grouped_edges);
    assert_eq!(summary.grouped_edges, g.edge_count());

    // The summary converts to a plain property graph.
    let pg = summary.to_property_graph();
    assert_eq!(pg.node_count(), 2);
    assert_eq!(pg.edge_count(), 4);
}

#[test]
fn identity_grouping_is_isomorphic_to_base() {
    let g = calls_graph();
    // Grouping by a property where every node is unique: use both city and
    // profession plus the call graph is too small for collisions, so group by
    // an artificial per-node key instead: external ids via a rebuilt graph.
    let dir = tempfile::tempdir().unwrap();
    let nodes = "id:uint,tag:int\n0,10\n1,11\n2,12\n";
    let edges = "src:uint,dst:uint,w:int\n0,1,5\n1,2,7\n2,0,9\n";
    let np = dir.path().join("n.csv");
    let ep = dir.path().join("e.csv");
    std::fs::write(&np, nodes).unwrap();
    std::fs::write(&ep, edges).unwrap();
    let g2 = load_graph(&np, &ep).unwrap();
    drop(g);

    let stmt = gvdl::parse(
        "create view Ident on G nodes group by tag aggregate n: count(*) \
         edges aggregate c: count(*)",
    )
    .unwrap();
    let BoundStatement::Aggregate(def) = gvdl::bind(&stmt, &g2).unwrap() else {
        panic!();
    };
    let summary = materialize_aggregate(&g2, &def, false);
    assert_eq!(summary.super_nodes.len(), 3);
    assert!(summary.super_nodes.iter().all(|n| n.aggs == vec![1]));
    assert_eq!(summary.super_edges.len(), 3);
    assert!(summary.super_edges.iter().all(|e| e.aggs == vec![1]));
}

#[test]
fn predicate_grouping_first_match_and_exclusion() {
    let g = calls_graph();
    let stmt = gvdl::parse(
        "create view Tri on Calls nodes group by [\
         (profession=`Doctor' and city=`NY'), \
         (profession=`Lawyer' and city=`LA'), \
         (profession=`Teacher' and city=`DC')] aggregate count(*)",
    )
    .unwrap();
    let BoundStatement::Aggregate(def) = gvdl::bind(&stmt, &g).unwrap() else {
        panic!();
    };
    let summary = materialize_aggregate(&g, &def, false);
    // Node 5 is the only NY doctor; node 8 the only LA lawyer; no DC teachers.
    assert_eq!(summary.super_nodes.len(), 2);
    assert_eq!(summary.grouped_nodes, 2);
    // Exactly one call 8 -> 5 (duration 6) connects the groups; everything
    // touching ungrouped nodes is excluded.
    assert_eq!(summary.grouped_edges, 1);
    let g0 = summary.group_index(&strata_graph::GroupKey::Index(0)).unwrap();
    let g1 = summary.group_index(&strata_graph::GroupKey::Index(1)).unwrap();
    let se = summary.super_edge(g1, g0).unwrap();
    assert_eq!(se.edge_count, 1);
    assert_eq!(se.aggs, vec![1]);
}

#[test]
fn predicate_grouping_with_no_matches_is_empty() {
    let g = calls_graph();
    let stmt = gvdl::parse(
        "create view None on Calls nodes group by [(city = 'Tokyo')] aggregate count(*)",
    )
    .unwrap();
    let BoundStatement::Aggregate(def) = gvdl::bind(&stmt, &g).unwrap() else {
        panic!();
    };
    let summary = materialize_aggregate(&g, &def, false);
    assert!(summary.super_nodes.is_empty());
    assert!(summary.super_edges.is_empty());
}

#[test]
fn node_predicates_reject_edge_references() {
    let g = calls_graph();
    let stmt = gvdl::parse("create view X on Calls nodes group by [(src.city = 'NY')]").unwrap();
    assert!(matches!(
        gvdl::bind(&stmt, &g),
        Err(BindError::EndpointRefInNodePredicate)
    ));
    let stmt = gvdl::parse("create view X on Calls nodes group by [(ID < 5)]").unwrap();
    assert!(matches!(
        gvdl::bind(&stmt, &g),
        Err(BindError::EdgeIdInNodePredicate)
    ));
    // Bare names in node context resolve against the node schema.
    let stmt = gvdl::parse("create view X on Calls nodes group by [(city = 'NY')]").unwrap();
    assert!(gvdl::bind(&stmt, &g).is_ok());
    let _ = PredContext::Node;
}
