//! The graph view definition language: statements that create filter views,
//! view collections, and aggregate views over a registered base graph.

pub mod ast;
pub mod bind;
pub mod lexer;
pub mod parser;

pub use ast::{
    AggFunc, AggSpec, AggregateViewDef, CmpOp, Grouping, Operand, Pred, Statement,
    ViewCollectionDef, ViewDef,
};
pub use bind::{
    bind, bind_pred, eval_node_predicate, eval_predicate, BindError, BoundAgg, BoundAggFunc,
    BoundAggregate, BoundCollection, BoundGrouping, BoundOperand, BoundPred, BoundStatement,
    BoundView, PredContext,
};
pub use lexer::SyntaxError;
pub use parser::{parse, ParseError};
