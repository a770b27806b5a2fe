//! Differential execution over view collections.
//!
//! The engine runs static dataflow programs across the views of a collection
//! by representing every stream as timestamped differences and sharing all
//! computation whose inputs did not change between views. The built-in
//! analytics and the adaptive differential/scratch splitter sit on top.

pub mod analytics;
pub mod dataflow;
pub mod exec;
pub mod oracle;
pub mod row;
pub mod splitting;
pub mod time;

pub use dataflow::{Dataflow, DataflowBuilder, IterMode, StreamId};
pub use exec::{
    run_on_collection, run_on_view, CollectionInput, DiffMap, Engine, EngineError, ExecConfig,
    OutputDiffStream, RunResult, ViewSummary,
};
pub use row::{ints, row1, row2, row3, Row, Value};
pub use time::Time;
