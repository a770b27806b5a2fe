//! Schema resolution and predicate evaluation.
//!
//! Binding resolves every property reference to a schema slot and type-checks
//! comparisons, so evaluation itself cannot fail.

use super::ast::*;
use crate::store::{EdgeRecord, NodeRecord, PropertyGraph};
use crate::value::{PropType, PropertyValue};

#[derive(Debug, thiserror::Error)]
pub enum BindError {
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("type mismatch: {lhs} {op} {rhs}")]
    TypeMismatch {
        lhs: PropType,
        op: &'static str,
        rhs: PropType,
    },
    #[error("ordering comparison on bool values")]
    OrderingOnBool,
    #[error("`src.` and `dst.` references are not allowed in node predicates")]
    EndpointRefInNodePredicate,
    #[error("`ID` is not allowed in node predicates")]
    EdgeIdInNodePredicate,
    #[error("sum target `{0}` is not int-typed")]
    SumTargetNotInt(String),
}

/// Whether bare property names resolve against the edge or the node schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredContext {
    Edge,
    Node,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundOperand {
    SrcProp(usize),
    DstProp(usize),
    EdgeProp(usize),
    NodeProp(usize),
    EdgeId,
    Lit(PropertyValue),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundPred {
    And(Box<BoundPred>, Box<BoundPred>),
    Or(Box<BoundPred>, Box<BoundPred>),
    Not(Box<BoundPred>),
    Cmp {
        lhs: BoundOperand,
        op: CmpOp,
        rhs: BoundOperand,
    },
}

#[derive(Debug, Clone)]
pub enum BoundStatement {
    View(BoundView),
    Collection(BoundCollection),
    Aggregate(BoundAggregate),
}

#[derive(Debug, Clone)]
pub struct BoundView {
    pub name: String,
    pub predicate: BoundPred,
}

#[derive(Debug, Clone)]
pub struct BoundCollection {
    pub name: String,
    pub views: Vec<(String, BoundPred)>,
}

#[derive(Debug, Clone)]
pub struct BoundAggregate {
    pub name: String,
    pub grouping: BoundGrouping,
    pub node_aggs: Vec<BoundAgg>,
    pub edge_aggs: Vec<BoundAgg>,
}

#[derive(Debug, Clone)]
pub enum BoundGrouping {
    /// Slots into the node schema.
    ByProps(Vec<usize>),
    ByPredicates(Vec<BoundPred>),
}

#[derive(Debug, Clone)]
pub struct BoundAgg {
    pub out_name: String,
    pub func: BoundAggFunc,
}

#[derive(Debug, Clone)]
pub enum BoundAggFunc {
    Count,
    /// Slot into the node or edge schema, depending on which side the
    /// aggregate was declared on.
    Sum(usize),
}

/// Binds a parsed statement against a graph's schemas.
pub fn bind(stmt: &Statement, g: &PropertyGraph) -> Result<BoundStatement, BindError> {
    match stmt {
        Statement::View(v) => Ok(BoundStatement::View(BoundView {
            name: v.name.clone(),
            predicate: bind_pred(&v.predicate, g, PredContext::Edge)?,
        })),
        Statement::Collection(c) => {
            let mut views = Vec::with_capacity(c.views.len());
            for (name, p) in &c.views {
                views.push((name.clone(), bind_pred(p, g, PredContext::Edge)?));
            }
            Ok(BoundStatement::Collection(BoundCollection {
                name: c.name.clone(),
                views,
            }))
        }
        Statement::Aggregate(a) => {
            let grouping = match &a.grouping {
                Grouping::ByProps(props) => {
                    let mut slots = Vec::with_capacity(props.len());
                    for p in props {
                        let slot = g
                            .node_schema
                            .index_of(p)
                            .ok_or_else(|| BindError::UnknownProperty(p.clone()))?;
                        slots.push(slot);
                    }
                    BoundGrouping::ByProps(slots)
                }
                Grouping::ByPredicates(preds) => {
                    let mut bound = Vec::with_capacity(preds.len());
                    for p in preds {
                        bound.push(bind_pred(p, g, PredContext::Node)?);
                    }
                    BoundGrouping::ByPredicates(bound)
                }
            };
            let node_aggs = bind_aggs(&a.node_aggs, g, PredContext::Node)?;
            let edge_aggs = bind_aggs(&a.edge_aggs, g, PredContext::Edge)?;
            Ok(BoundStatement::Aggregate(BoundAggregate {
                name: a.name.clone(),
                grouping,
                node_aggs,
                edge_aggs,
            }))
        }
    }
}

fn bind_aggs(
    aggs: &[AggSpec],
    g: &PropertyGraph,
    ctx: PredContext,
) -> Result<Vec<BoundAgg>, BindError> {
    let schema = match ctx {
        PredContext::Edge => &g.edge_schema,
        PredContext::Node => &g.node_schema,
    };
    aggs.iter()
        .map(|a| {
            let func = match &a.func {
                AggFunc::Count => BoundAggFunc::Count,
                AggFunc::Sum(prop) => {
                    let slot = schema
                        .index_of(prop)
                        .ok_or_else(|| BindError::UnknownProperty(prop.clone()))?;
                    if schema.props[slot].1 != PropType::Int {
                        return Err(BindError::SumTargetNotInt(prop.clone()));
                    }
                    BoundAggFunc::Sum(slot)
                }
            };
            Ok(BoundAgg {
                out_name: a.output_name(),
                func,
            })
        })
        .collect()
}

pub fn bind_pred(
    pred: &Pred,
    g: &PropertyGraph,
    ctx: PredContext,
) -> Result<BoundPred, BindError> {
    match pred {
        Pred::And(a, b) => Ok(BoundPred::And(
            Box::new(bind_pred(a, g, ctx)?),
            Box::new(bind_pred(b, g, ctx)?),
        )),
        Pred::Or(a, b) => Ok(BoundPred::Or(
            Box::new(bind_pred(a, g, ctx)?),
            Box::new(bind_pred(b, g, ctx)?),
        )),
        Pred::Not(a) => Ok(BoundPred::Not(Box::new(bind_pred(a, g, ctx)?))),
        Pred::Cmp { lhs, op, rhs } => {
            let (lhs, lt) = bind_operand(lhs, g, ctx)?;
            let (rhs, rt) = bind_operand(rhs, g, ctx)?;
            if lt != rt {
                return Err(BindError::TypeMismatch {
                    lhs: lt,
                    op: op.symbol(),
                    rhs: rt,
                });
            }
            if op.is_ordering() && lt == PropType::Bool {
                return Err(BindError::OrderingOnBool);
            }
            Ok(BoundPred::Cmp { lhs, op: *op, rhs })
        }
    }
}

fn bind_operand(
    operand: &Operand,
    g: &PropertyGraph,
    ctx: PredContext,
) -> Result<(BoundOperand, PropType), BindError> {
    let node_slot = |prop: &str| {
        g.node_schema
            .index_of(prop)
            .ok_or_else(|| BindError::UnknownProperty(prop.to_string()))
    };
    match operand {
        Operand::SrcProp(p) => {
            if ctx == PredContext::Node {
                return Err(BindError::EndpointRefInNodePredicate);
            }
            let slot = node_slot(p)?;
            Ok((BoundOperand::SrcProp(slot), g.node_schema.props[slot].1))
        }
        Operand::DstProp(p) => {
            if ctx == PredContext::Node {
                return Err(BindError::EndpointRefInNodePredicate);
            }
            let slot = node_slot(p)?;
            Ok((BoundOperand::DstProp(slot), g.node_schema.props[slot].1))
        }
        Operand::Prop(p) => match ctx {
            PredContext::Edge => {
                let slot = g
                    .edge_schema
                    .index_of(p)
                    .ok_or_else(|| BindError::UnknownProperty(p.clone()))?;
                Ok((BoundOperand::EdgeProp(slot), g.edge_schema.props[slot].1))
            }
            PredContext::Node => {
                let slot = node_slot(p)?;
                Ok((BoundOperand::NodeProp(slot), g.node_schema.props[slot].1))
            }
        },
        Operand::EdgeId => {
            if ctx == PredContext::Node {
                return Err(BindError::EdgeIdInNodePredicate);
            }
            Ok((BoundOperand::EdgeId, PropType::Int))
        }
        Operand::Lit(v) => Ok((BoundOperand::Lit(v.clone()), v.prop_type())),
    }
}

fn cmp_values(lhs: &PropertyValue, op: CmpOp, rhs: &PropertyValue) -> bool {
    match op {
        CmpOp::Eq => lhs == rhs,
        CmpOp::Ne => lhs != rhs,
        CmpOp::Lt => lhs < rhs,
        CmpOp::Le => lhs <= rhs,
        CmpOp::Gt => lhs > rhs,
        CmpOp::Ge => lhs >= rhs,
    }
}

fn edge_operand_value<'a>(
    operand: &'a BoundOperand,
    e: &'a EdgeRecord,
    g: &'a PropertyGraph,
) -> PropertyValue {
    match operand {
        BoundOperand::SrcProp(slot) => g.node_prop(e.src, *slot).clone(),
        BoundOperand::DstProp(slot) => g.node_prop(e.dst, *slot).clone(),
        BoundOperand::EdgeProp(slot) => e.props[*slot].clone(),
        BoundOperand::NodeProp(_) => unreachable!("node ref bound in edge context"),
        BoundOperand::EdgeId => PropertyValue::Int(e.eid as i64),
        BoundOperand::Lit(v) => v.clone(),
    }
}

/// Evaluates a bound edge predicate. Pure; all failure modes are caught at
/// bind time.
pub fn eval_predicate(pred: &BoundPred, e: &EdgeRecord, g: &PropertyGraph) -> bool {
    match pred {
        BoundPred::And(a, b) => eval_predicate(a, e, g) && eval_predicate(b, e, g),
        BoundPred::Or(a, b) => eval_predicate(a, e, g) || eval_predicate(b, e, g),
        BoundPred::Not(a) => !eval_predicate(a, e, g),
        BoundPred::Cmp { lhs, op, rhs } => {
            let l = edge_operand_value(lhs, e, g);
            let r = edge_operand_value(rhs, e, g);
            cmp_values(&l, *op, &r)
        }
    }
}

/// Evaluates a bound node predicate (aggregate-view grouping).
pub fn eval_node_predicate(pred: &BoundPred, n: &NodeRecord) -> bool {
    match pred {
        BoundPred::And(a, b) => eval_node_predicate(a, n) && eval_node_predicate(b, n),
        BoundPred::Or(a, b) => eval_node_predicate(a, n) || eval_node_predicate(b, n),
        BoundPred::Not(a) => !eval_node_predicate(a, n),
        BoundPred::Cmp { lhs, op, rhs } => {
            let value = |o: &BoundOperand| -> PropertyValue {
                match o {
                    BoundOperand::NodeProp(slot) => n.props[*slot].clone(),
                    BoundOperand::Lit(v) => v.clone(),
                    _ => unreachable!("edge ref bound in node context"),
                }
            };
            cmp_values(&value(lhs), *op, &value(rhs))
        }
    }
}
