//! Workspace commands and benchmark generators behind the `strata` binary.

pub mod commands;
pub mod gen;
pub mod workspace;

pub use commands::{
    cmd_create, cmd_gen, cmd_load, cmd_run, cmd_stats, CommandError, CreateOutcome,
    OrderingChoice, RunMode, RunParams, RunReport,
};
pub use gen::{generate, BenchSpec, Generated};
pub use workspace::{Workspace, WorkspaceError, WORKSPACE_ENV};
