//! `strata` — load graphs, materialize view collections, and run analytics
//! across them.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use strata_cli::commands::{
    self, CommandError, CreateOutcome, OrderingChoice, RunMode, RunParams,
};
use strata_cli::gen::BenchSpec;
use strata_cli::workspace::{Workspace, WORKSPACE_ENV};
use strata_engine::analytics::Algorithm;
use strata_engine::splitting::CostSignal;

#[derive(Parser)]
#[command(name = "strata", about = "View-collection graph analytics workspace")]
struct Cli {
    /// Workspace root; defaults to $STRATA_WORKSPACE or ./strata-workspace.
    #[arg(long, global = true)]
    workspace: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Register a base graph from node and edge CSV files.
    Load {
        name: String,
        node_file: PathBuf,
        edge_file: PathBuf,
    },
    /// Materialize the statement in a GVDL file (view, collection, or
    /// aggregate view).
    Create {
        gvdl_file: PathBuf,
        /// optimized | default | random:<seed>
        #[arg(long, default_value = "optimized")]
        ordering: String,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Run an analytics computation over a materialized collection.
    Run {
        collection: String,
        /// wcc | scc | bfs | sssp | pr | mpsp
        algorithm: String,
        /// diff | scratch | adaptive
        #[arg(long, default_value = "diff")]
        mode: String,
        /// Splitting decision batch size.
        #[arg(long, default_value_t = 10)]
        batch: usize,
        /// Source vertex for bfs/sssp.
        #[arg(long)]
        source: Option<u32>,
        /// src:dst pairs for mpsp, comma separated.
        #[arg(long)]
        pairs: Option<String>,
        #[arg(long, default_value_t = 10)]
        iters: u32,
        #[arg(long, default_value_t = 0.85)]
        damping: f64,
        /// Edge property used as the weight (defaults to `duration` when
        /// present, else unit weights).
        #[arg(long)]
        weight_prop: Option<String>,
        /// Cost signal for adaptive decisions: time | work.
        #[arg(long, default_value = "time")]
        signal: String,
        /// Repeat the run and report the median total.
        #[arg(long, default_value_t = 1)]
        repeat: usize,
    },
    /// Generate a synthetic benchmark graph plus its collection statement.
    Gen {
        /// expanding-window | sliding-window | community-removal |
        /// random-churn | segmented-expansion
        shape: String,
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        views: usize,
        #[arg(long, default_value_t = 10)]
        width: i64,
        #[arg(long, default_value_t = 50)]
        nodes: u32,
        #[arg(long, default_value_t = 200)]
        edges: usize,
        #[arg(long, default_value_t = 5)]
        communities: usize,
        #[arg(long, default_value_t = 2)]
        remove: usize,
        #[arg(long, default_value_t = 10)]
        community_size: u32,
        #[arg(long, default_value_t = 40)]
        adds: usize,
        #[arg(long, default_value_t = 40)]
        dels: usize,
        #[arg(long, default_value_t = 4)]
        segments: i64,
        #[arg(long, default_value_t = 5)]
        expansions: i64,
    },
    /// List registered graphs and collections.
    Stats,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let root = cli
        .workspace
        .or_else(|| std::env::var_os(WORKSPACE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("strata-workspace"));
    match dispatch(&root, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(root: &std::path::Path, command: Command) -> Result<(), CommandError> {
    match command {
        Command::Load {
            name,
            node_file,
            edge_file,
        } => {
            let mut ws = Workspace::open(root)?;
            let (nodes, edges) = commands::cmd_load(&mut ws, &name, &node_file, &edge_file)?;
            println!("loaded graph {name}: |V|={nodes} |E|={edges}");
            Ok(())
        }
        Command::Create {
            gvdl_file,
            ordering,
            threads,
        } => {
            let text = std::fs::read_to_string(&gvdl_file).map_err(|e| {
                CommandError::User(format!("cannot read {}: {e}", gvdl_file.display()))
            })?;
            let ordering = OrderingChoice::parse(&ordering)?;
            let mut ws = Workspace::open(root)?;
            match commands::cmd_create(&mut ws, &text, ordering, threads)? {
                CreateOutcome::View { name, edges } => {
                    println!("materialized view {name}: {edges} edges");
                }
                CreateOutcome::Collection {
                    name,
                    views,
                    diffs,
                    cct_ms,
                    ordering,
                } => {
                    println!("materialized collection {name}: {views} views");
                    println!("#diffs = {diffs}");
                    println!("CCT = {cct_ms:.1} ms (ordering {:.1} ms)", ordering.ordering_ms);
                    println!(
                        "order = {:?} (default #diffs = {}, chosen #diffs = {})",
                        ordering.view_names, ordering.diffs_default, ordering.diffs_chosen
                    );
                }
                CreateOutcome::Aggregate {
                    name,
                    super_nodes,
                    super_edges,
                } => {
                    println!(
                        "materialized aggregate view {name}: {super_nodes} super-nodes, \
                         {super_edges} super-edges (registered as graph {name})"
                    );
                }
            }
            Ok(())
        }
        Command::Run {
            collection,
            algorithm,
            mode,
            batch,
            source,
            pairs,
            iters,
            damping,
            weight_prop,
            signal,
            repeat,
        } => {
            let algorithm = Algorithm::parse(&algorithm)
                .ok_or_else(|| CommandError::User(format!("unknown algorithm `{algorithm}`")))?;
            let mut params = RunParams::new(algorithm);
            params.mode = RunMode::parse(&mode)?;
            params.batch = batch;
            params.source = source;
            params.pairs = match pairs {
                Some(p) => commands::parse_pairs(&p)?,
                None => Vec::new(),
            };
            params.iterations = iters;
            params.damping = damping;
            params.weight_prop = weight_prop;
            params.signal = match signal.as_str() {
                "time" => CostSignal::WallTime,
                "work" => CostSignal::WorkCount,
                other => {
                    return Err(CommandError::User(format!(
                        "unknown signal `{other}` (expected time|work)"
                    )))
                }
            };
            params.repeat = repeat;
            let ws = Workspace::open(root)?;
            let report = commands::cmd_run(&ws, &collection, &params)?;
            println!(
                "ran {} on {} in {} mode: {:.1} ms total",
                report.algorithm.name(),
                report.collection,
                report.mode.name(),
                report.total_ms
            );
            println!(
                "#diffs = {} (input), {} output entries, work = {:?}",
                report.input_diffs, report.output_diffs, report.work
            );
            if report.mode == RunMode::Adaptive {
                println!("decisions = {:?}", report.decisions);
            }
            println!("results: {}", report.results_file);
            println!("diff stream: {}", report.diffs_file);
            println!("run log: {}", report.log_file);
            Ok(())
        }
        Command::Gen {
            shape,
            name,
            seed,
            views,
            width,
            nodes,
            edges,
            communities,
            remove,
            community_size,
            adds,
            dels,
            segments,
            expansions,
        } => {
            let spec = match shape.as_str() {
                "expanding-window" => BenchSpec::ExpandingWindow {
                    views,
                    width,
                    nodes,
                    edges,
                },
                "sliding-window" => BenchSpec::SlidingWindow {
                    views,
                    width,
                    nodes,
                    edges,
                },
                "community-removal" => BenchSpec::CommunityRemoval {
                    communities,
                    remove,
                    community_size,
                    intra_edges: edges,
                    inter_edges: edges / 4,
                },
                "random-churn" => BenchSpec::RandomChurn {
                    views,
                    base_edges: edges,
                    adds,
                    dels,
                    nodes,
                },
                "segmented-expansion" => BenchSpec::SegmentedExpansion {
                    segments,
                    expansions,
                    nodes,
                    edges,
                },
                other => {
                    return Err(CommandError::User(format!("unknown benchmark `{other}`")))
                }
            };
            let mut ws = Workspace::open(root)?;
            let (graph_name, gvdl_path) = commands::cmd_gen(&mut ws, &spec, &name, seed)?;
            println!("generated graph {graph_name} and statement {}", gvdl_path.display());
            Ok(())
        }
        Command::Stats => {
            let ws = Workspace::open(root)?;
            for line in commands::cmd_stats(&ws) {
                println!("{line}");
            }
            Ok(())
        }
    }
}
