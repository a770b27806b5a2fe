//! Command implementations shared by the binary and the test suites.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use strata_collection::{
    compute_ebm, compute_eds, diff_count, optimize_order_partitioned, EdgeDifferenceStream,
    ViewOrder,
};
use strata_engine::analytics::{build_dataflow, Algorithm, AnalyticsSpec, EDGES_INPUT};
use strata_engine::row::{row3, Row, Value};
use strata_engine::splitting::{run_adaptive, run_plan, AdaptiveResult, CostSignal, Mode};
use strata_engine::{CollectionInput, ExecConfig};
use strata_graph::gvdl::{self, BoundStatement};
use strata_graph::{materialize_aggregate, PropertyGraph};

use crate::gen::{generate, BenchSpec};
use crate::workspace::{CollectionEntry, Workspace, WorkspaceError};

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
    #[error("parse error: {0}")]
    Parse(#[from] gvdl::ParseError),
    #[error("bind error: {0}")]
    Bind(#[from] gvdl::BindError),
    #[error(transparent)]
    Analytics(#[from] strata_engine::analytics::AnalyticsError),
    #[error("engine error: {0}")]
    Engine(#[from] strata_engine::EngineError),
    #[error("split error: {0}")]
    Split(#[from] strata_engine::splitting::SplitError),
    #[error("{0}")]
    User(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl CommandError {
    /// Process exit code: 2 for user errors, 3 for internal invariant
    /// violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Workspace(WorkspaceError::BadManifest(_)) => 3,
            CommandError::Engine(_) | CommandError::Internal(_) => 3,
            CommandError::Split(strata_engine::splitting::SplitError::Engine(_)) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingChoice {
    Optimized,
    Default,
    Random(u64),
}

impl OrderingChoice {
    pub fn parse(text: &str) -> Result<OrderingChoice, CommandError> {
        match text {
            "optimized" => Ok(OrderingChoice::Optimized),
            "default" => Ok(OrderingChoice::Default),
            other => match other.strip_prefix("random:") {
                Some(seed) => seed
                    .parse()
                    .map(OrderingChoice::Random)
                    .map_err(|_| CommandError::User(format!("bad random seed in `{other}`"))),
                None => Err(CommandError::User(format!(
                    "unknown ordering `{other}` (expected optimized|default|random:<seed>)"
                ))),
            },
        }
    }
}

#[derive(Debug)]
pub struct OrderingReport {
    pub order: Vec<usize>,
    pub view_names: Vec<String>,
    pub diffs_default: u64,
    pub diffs_chosen: u64,
    pub ordering_ms: f64,
}

#[derive(Debug)]
pub enum CreateOutcome {
    View {
        name: String,
        edges: usize,
    },
    Collection {
        name: String,
        views: usize,
        diffs: u64,
        cct_ms: f64,
        ordering: OrderingReport,
    },
    Aggregate {
        name: String,
        super_nodes: usize,
        super_edges: usize,
    },
}

pub fn cmd_load(
    ws: &mut Workspace,
    name: &str,
    node_file: &std::path::Path,
    edge_file: &std::path::Path,
) -> Result<(usize, usize), CommandError> {
    let entry = ws.register_graph(name, node_file, edge_file)?;
    Ok((entry.nodes, entry.edges))
}

/// Parses, binds, and materializes a statement: a filter view, a view
/// collection (EBM + ordering + difference stream), or an aggregate view.
pub fn cmd_create(
    ws: &mut Workspace,
    gvdl_text: &str,
    ordering: OrderingChoice,
    threads: usize,
) -> Result<CreateOutcome, CommandError> {
    let stmt = gvdl::parse(gvdl_text)?;
    let graph = ws.load_registered_graph(stmt.graph())?;
    let bound = gvdl::bind(&stmt, &graph)?;
    match bound {
        BoundStatement::View(v) => {
            // A single view is a one-view collection; its stream is its edge
            // list.
            let views = vec![(v.name.clone(), v.predicate)];
            let ebm = compute_ebm(&graph, &views, threads);
            let order = ViewOrder::identity(1);
            let eds = compute_eds(&ebm, &order, &v.name);
            let edges = eds.view_sizes()[0];
            let entry = CollectionEntry {
                graph: stmt.graph().to_string(),
                eds_file: ws.collection_path(&v.name).to_string_lossy().into_owned(),
                views: 1,
                diffs: eds.total_entries(),
                order: vec![0],
                view_names: vec![v.name.clone()],
            };
            ws.register_collection(&v.name, entry, &eds.serialize())?;
            Ok(CreateOutcome::View {
                name: v.name,
                edges,
            })
        }
        BoundStatement::Collection(c) => {
            let started = Instant::now();
            let ebm = compute_ebm(&graph, &c.views, threads);
            let ordering_started = Instant::now();
            let chosen = match ordering {
                OrderingChoice::Default => ViewOrder::identity(ebm.k()),
                OrderingChoice::Optimized => optimize_order_partitioned(&ebm, threads),
                OrderingChoice::Random(seed) => {
                    let mut perm: Vec<usize> = (0..ebm.k()).collect();
                    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                    ViewOrder::new(perm).expect("shuffled permutation is valid")
                }
            };
            let ordering_ms = ordering_started.elapsed().as_secs_f64() * 1e3;
            let diffs_default = diff_count(&ebm, &ViewOrder::identity(ebm.k()));
            let diffs_chosen = diff_count(&ebm, &chosen);
            let eds = compute_eds(&ebm, &chosen, &c.name);
            if eds.total_entries() != diffs_chosen {
                return Err(CommandError::Internal(
                    "difference stream size disagrees with the diff count".into(),
                ));
            }
            let cct_ms = started.elapsed().as_secs_f64() * 1e3;
            let entry = CollectionEntry {
                graph: stmt.graph().to_string(),
                eds_file: ws.collection_path(&c.name).to_string_lossy().into_owned(),
                views: ebm.k(),
                diffs: diffs_chosen,
                order: chosen.as_slice().to_vec(),
                view_names: eds.view_names.clone(),
            };
            ws.register_collection(&c.name, entry, &eds.serialize())?;
            Ok(CreateOutcome::Collection {
                name: c.name,
                views: ebm.k(),
                diffs: diffs_chosen,
                cct_ms,
                ordering: OrderingReport {
                    order: chosen.as_slice().to_vec(),
                    view_names: eds.view_names.clone(),
                    diffs_default,
                    diffs_chosen,
                    ordering_ms,
                },
            })
        }
        BoundStatement::Aggregate(a) => {
            let summary = materialize_aggregate(&graph, &a, false);
            let pg = summary.to_property_graph();
            ws.store_graph(&a.name, &pg)?;
            Ok(CreateOutcome::Aggregate {
                name: a.name,
                super_nodes: summary.super_nodes.len(),
                super_edges: summary.super_edges.len(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Diff,
    Scratch,
    Adaptive,
}

impl RunMode {
    pub fn parse(text: &str) -> Result<RunMode, CommandError> {
        match text {
            "diff" => Ok(RunMode::Diff),
            "scratch" => Ok(RunMode::Scratch),
            "adaptive" => Ok(RunMode::Adaptive),
            other => Err(CommandError::User(format!(
                "unknown mode `{other}` (expected diff|scratch|adaptive)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RunMode::Diff => "diff",
            RunMode::Scratch => "scratch",
            RunMode::Adaptive => "adaptive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunParams {
    pub algorithm: Algorithm,
    pub mode: RunMode,
    pub batch: usize,
    pub source: Option<u32>,
    pub pairs: Vec<(u32, u32)>,
    pub iterations: u32,
    pub damping: f64,
    pub weight_prop: Option<String>,
    pub signal: CostSignal,
    pub repeat: usize,
}

impl RunParams {
    pub fn new(algorithm: Algorithm) -> RunParams {
        RunParams {
            algorithm,
            mode: RunMode::Diff,
            batch: 10,
            source: None,
            pairs: Vec::new(),
            iterations: 10,
            damping: 0.85,
            weight_prop: None,
            signal: CostSignal::WallTime,
            repeat: 1,
        }
    }
}

#[derive(Debug)]
pub struct RunReport {
    pub collection: String,
    pub algorithm: Algorithm,
    pub mode: RunMode,
    /// Input difference entries of the materialized collection.
    pub input_diffs: u64,
    /// Entries in the output difference stream.
    pub output_diffs: usize,
    pub per_view_ms: Vec<f64>,
    pub total_ms: f64,
    pub work: Vec<u64>,
    pub decisions: Vec<(usize, &'static str)>,
    pub results_file: String,
    pub diffs_file: String,
    pub log_file: String,
    pub result: AdaptiveResult,
}

/// Builds the engine input for a materialized collection: each difference
/// entry becomes the edge's [src, dst, weight] row.
pub fn collection_engine_input(
    eds: &EdgeDifferenceStream,
    graph: &PropertyGraph,
    weight_slot: Option<usize>,
) -> CollectionInput {
    let mut views: Vec<Vec<(Row, i64)>> = vec![Vec::new(); eds.k()];
    for entry in &eds.entries {
        let e = graph.edge(entry.edge);
        let w = weight_slot
            .map(|slot| e.props[slot].as_int().unwrap_or(1))
            .unwrap_or(1);
        views[entry.position - 1].push((
            row3(
                Value::Int(e.src as i64),
                Value::Int(e.dst as i64),
                Value::Int(w),
            ),
            entry.multiplicity as i64,
        ));
    }
    CollectionInput::single(EDGES_INPUT, views)
}

/// Resolves the weight property: an explicit flag, else `duration` when the
/// edge schema has it, else unit weights.
pub fn resolve_weight_slot(
    graph: &PropertyGraph,
    weight_prop: &Option<String>,
) -> Result<Option<usize>, CommandError> {
    match weight_prop {
        Some(name) => graph
            .edge_schema
            .index_of(name)
            .map(Some)
            .ok_or_else(|| CommandError::User(format!("unknown weight property `{name}`"))),
        None => Ok(graph.edge_schema.index_of("duration")),
    }
}

pub fn cmd_run(
    ws: &Workspace,
    collection: &str,
    params: &RunParams,
) -> Result<RunReport, CommandError> {
    let entry = ws.collection_entry(collection)?.clone();
    let graph = ws.load_registered_graph(&entry.graph)?;
    let eds = EdgeDifferenceStream::deserialize(&ws.read_collection(collection)?)
        .map_err(|e| CommandError::Internal(format!("stored stream unreadable: {e}")))?;
    if eds.total_entries() != entry.diffs {
        return Err(CommandError::Internal(
            "manifest diff count disagrees with the stored stream".into(),
        ));
    }
    let weight_slot = resolve_weight_slot(&graph, &params.weight_prop)?;
    let input = collection_engine_input(&eds, &graph, weight_slot);

    let mut spec = AnalyticsSpec::new(params.algorithm);
    spec.source = params.source;
    spec.pairs = params.pairs.clone();
    spec.iterations = params.iterations;
    spec.damping = params.damping;
    let df = build_dataflow(&spec, graph.node_count() as u32)?;
    let cfg = ExecConfig::default();

    let mut runs: Vec<(AdaptiveResult, f64)> = Vec::new();
    for _ in 0..params.repeat.max(1) {
        let started = Instant::now();
        let result = match params.mode {
            RunMode::Diff => {
                let plan = vec![Mode::Differential; input.len()];
                run_plan(&df, &input, EDGES_INPUT, &plan, &cfg)?
            }
            RunMode::Scratch => {
                let plan = vec![Mode::Scratch; input.len()];
                run_plan(&df, &input, EDGES_INPUT, &plan, &cfg)?
            }
            RunMode::Adaptive => {
                if input.len() < 2 {
                    return Err(CommandError::User(
                        "adaptive mode needs a collection with at least 2 views".into(),
                    ));
                }
                run_adaptive(&df, &input, EDGES_INPUT, params.batch, params.signal, &cfg)?
            }
        };
        let total_ms = started.elapsed().as_secs_f64() * 1e3;
        runs.push((result, total_ms));
    }
    // Median total over repeats; the reported run is the median one.
    runs.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (result, total_ms) = runs.swap_remove(runs.len() / 2);

    // Per-view accumulated results.
    let mut results_text = String::from("view,record\n");
    for v in 0..result.output.view_count() {
        let rows = result.output.accumulate(v)?;
        for row in rows {
            results_text.push_str(&format!("{v},{}\n", row_to_csv(&row)));
        }
    }
    // The raw output difference stream.
    let mut diffs_text = String::from("view,record,multiplicity\n");
    for (v, diffs) in result.output.per_view.iter().enumerate() {
        for (row, m) in diffs {
            diffs_text.push_str(&format!("{v},{},{m}\n", row_to_csv(row)));
        }
    }
    // Decision log.
    let mut log_text = String::from("view,decision,size,time,work\n");
    for e in &result.log.entries {
        log_text.push_str(&format!(
            "{},{},{},{:.6},{}\n",
            e.view,
            e.decision.name(),
            e.size,
            e.elapsed_ms,
            e.work
        ));
    }
    let base = format!("{collection}-{}-{}", params.algorithm.name(), params.mode.name());
    let results_file = ws.write_run_file(&format!("{base}.results.csv"), &results_text)?;
    let diffs_file = ws.write_run_file(&format!("{base}.diffs.csv"), &diffs_text)?;
    let log_file = ws.write_run_file(&format!("{base}.log.csv"), &log_text)?;

    Ok(RunReport {
        collection: collection.to_string(),
        algorithm: params.algorithm,
        mode: params.mode,
        input_diffs: entry.diffs,
        output_diffs: result.output.total_entries(),
        per_view_ms: result.log.entries.iter().map(|e| e.elapsed_ms).collect(),
        total_ms,
        work: result.log.entries.iter().map(|e| e.work).collect(),
        decisions: result
            .log
            .entries
            .iter()
            .map(|e| (e.view, e.decision.name()))
            .collect(),
        results_file: results_file.to_string_lossy().into_owned(),
        diffs_file: diffs_file.to_string_lossy().into_owned(),
        log_file: log_file.to_string_lossy().into_owned(),
        result,
    })
}

fn row_to_csv(row: &Row) -> String {
    row.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Generates a synthetic benchmark: registers the graph and writes the
/// collection statement next to the workspace manifest.
pub fn cmd_gen(
    ws: &mut Workspace,
    spec: &BenchSpec,
    name: &str,
    seed: u64,
) -> Result<(String, std::path::PathBuf), CommandError> {
    let graph_name = format!("{name}-graph");
    let generated = generate(spec, name, &graph_name, seed);
    ws.store_graph(&graph_name, &generated.graph)?;
    let gvdl_path = ws.root().join(format!("{name}.gvdl"));
    std::fs::write(&gvdl_path, &generated.collection_gvdl).map_err(|e| {
        CommandError::Workspace(WorkspaceError::Io {
            path: gvdl_path.clone(),
            source: e,
        })
    })?;
    Ok((graph_name, gvdl_path))
}

/// One stats line per registered artifact.
pub fn cmd_stats(ws: &Workspace) -> Vec<String> {
    let mut out = Vec::new();
    for (name, g) in &ws.manifest().graphs {
        out.push(format!("graph {name}: |V|={} |E|={}", g.nodes, g.edges));
    }
    for (name, c) in &ws.manifest().collections {
        out.push(format!(
            "collection {name}: graph={} views={} diffs={} order={:?}",
            c.graph, c.views, c.diffs, c.order
        ));
    }
    out
}

pub fn parse_pairs(text: &str) -> Result<Vec<(u32, u32)>, CommandError> {
    text.split(',')
        .map(|p| {
            let (a, b) = p
                .split_once(':')
                .ok_or_else(|| CommandError::User(format!("bad pair `{p}` (expected src:dst)")))?;
            let a = a
                .trim()
                .parse()
                .map_err(|_| CommandError::User(format!("bad pair source `{a}`")))?;
            let b = b
                .trim()
                .parse()
                .map_err(|_| CommandError::User(format!("bad pair target `{b}`")))?;
            Ok((a, b))
        })
        .collect()
}
