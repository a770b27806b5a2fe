//! Property graph storage, the graph view definition language, and aggregate
//! views.
//!
//! Graphs are loaded once from CSV files and are immutable afterwards, so
//! they can be shared freely across threads and evaluation contexts.

pub mod aggregate;
pub mod gvdl;
pub mod store;
pub mod value;

pub use aggregate::{materialize_aggregate, GroupKey, SummaryGraph};
pub use store::{load_graph, EdgeId, EdgeRecord, GraphError, NodeId, NodeRecord, PropertyGraph, Schema};
pub use value::{PropType, PropertyValue};
