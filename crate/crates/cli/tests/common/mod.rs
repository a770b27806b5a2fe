//! Shared fixtures for the integration and acceptance suites.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use strata_cli::workspace::Workspace;
use strata_engine::analytics::{edges_to_rows, EDGES_INPUT};
use strata_engine::row::Row;
use strata_engine::CollectionInput;

/// The running-example phone call graph: 8 customers, 15 calls.
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

pub struct TestWs {
    pub _dir: tempfile::TempDir,
    pub root: PathBuf,
    pub inputs: PathBuf,
}

impl TestWs {
    pub fn new() -> TestWs {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("ws");
        let inputs = dir.path().join("in");
        std::fs::create_dir_all(&inputs).unwrap();
        TestWs {
            _dir: dir,
            root,
            inputs,
        }
    }

    pub fn open(&self) -> Workspace {
        Workspace::open(&self.root).unwrap()
    }

    pub fn write_calls(&self) -> (PathBuf, PathBuf) {
        let n = self.inputs.join("nodes.csv");
        let e = self.inputs.join("edges.csv");
        std::fs::write(&n, CALLS_NODES).unwrap();
        std::fs::write(&e, CALLS_EDGES).unwrap();
        (n, e)
    }
}

pub type Edge = (u32, u32, i64);

/// Engine input diffs from full per-view edge states.
pub fn collection_from_states(states: &[Vec<Edge>]) -> CollectionInput {
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
