//! Parsed statements of the view definition language.

use crate::value::PropertyValue;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    View(ViewDef),
    Collection(ViewCollectionDef),
    Aggregate(AggregateViewDef),
}

impl Statement {
    pub fn name(&self) -> &str {
        match self {
            Statement::View(v) => &v.name,
            Statement::Collection(c) => &c.name,
            Statement::Aggregate(a) => &a.name,
        }
    }

    pub fn graph(&self) -> &str {
        match self {
            Statement::View(v) => &v.graph,
            Statement::Collection(c) => &c.graph,
            Statement::Aggregate(a) => &a.graph,
        }
    }
}

/// `create view NAME on GRAPH edges where PRED`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewDef {
    pub name: String,
    pub graph: String,
    pub predicate: Pred,
}

/// `create view collection NAME on GRAPH [V1: p1], [V2: p2], ...`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewCollectionDef {
    pub name: String,
    pub graph: String,
    pub views: Vec<(String, Pred)>,
}

/// `create view NAME on GRAPH nodes group by ... [aggregate ...] [edges aggregate ...]`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateViewDef {
    pub name: String,
    pub graph: String,
    pub grouping: Grouping,
    pub node_aggs: Vec<AggSpec>,
    pub edge_aggs: Vec<AggSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Grouping {
    /// Group nodes by the values of these properties.
    ByProps(Vec<String>),
    /// Ordered predicate list; a node joins the first group whose predicate
    /// it satisfies, and is dropped if it matches none.
    ByPredicates(Vec<Pred>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggSpec {
    pub out_name: Option<String>,
    pub func: AggFunc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AggFunc {
    Count,
    Sum(String),
}

impl AggSpec {
    /// The property name the aggregate is stored under.
    pub fn output_name(&self) -> String {
        match (&self.out_name, &self.func) {
            (Some(n), _) => n.clone(),
            (None, AggFunc::Count) => "count".to_string(),
            (None, AggFunc::Sum(p)) => format!("sum-{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pred {
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    Cmp {
        lhs: Operand,
        op: CmpOp,
        rhs: Operand,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    /// `src.<prop>` — a property of the edge's source node.
    SrcProp(String),
    /// `dst.<prop>` — a property of the edge's destination node.
    DstProp(String),
    /// Bare name: an edge property in edge context, a node property in
    /// node-grouping context.
    Prop(String),
    /// `ID` — the edge id.
    EdgeId,
    Lit(PropertyValue),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn is_ordering(self) -> bool {
        matches!(self, CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

// Pretty-printing. `parse(pretty(ast))` must reproduce `ast` exactly, which
// the round-trip tests rely on.

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::SrcProp(p) => write!(f, "src.{p}"),
            Operand::DstProp(p) => write!(f, "dst.{p}"),
            Operand::Prop(p) => write!(f, "{p}"),
            Operand::EdgeId => write!(f, "ID"),
            Operand::Lit(PropertyValue::Str(s)) => write!(f, "'{s}'"),
            Operand::Lit(v) => write!(f, "{v}"),
        }
    }
}

impl Pred {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let prec = match self {
            Pred::Or(..) => 1,
            Pred::And(..) => 2,
            Pred::Not(..) => 3,
            Pred::Cmp { .. } => 4,
        };
        let parens = prec < parent;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Pred::Or(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " or ")?;
                b.fmt_prec(f, 2)?;
            }
            Pred::And(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " and ")?;
                b.fmt_prec(f, 3)?;
            }
            Pred::Not(a) => {
                write!(f, "not ")?;
                a.fmt_prec(f, 4)?;
            }
            Pred::Cmp { lhs, op, rhs } => {
                write!(f, "{lhs} {} {rhs}", op.symbol())?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::View(v) => write!(
                f,
                "create view {} on {} edges where {}",
                v.name, v.graph, v.predicate
            ),
            Statement::Collection(c) => {
                write!(f, "create view collection {} on {}", c.name, c.graph)?;
                for (i, (name, pred)) in c.views.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, " [{name}: {pred}]")?;
                }
                Ok(())
            }
            Statement::Aggregate(a) => {
                write!(f, "create view {} on {} nodes group by ", a.name, a.graph)?;
                match &a.grouping {
                    Grouping::ByProps(props) => write!(f, "{}", props.join(", "))?,
                    Grouping::ByPredicates(preds) => {
                        write!(f, "[")?;
                        for (i, p) in preds.iter().enumerate() {
                            if i > 0 {
                                write!(f, ", ")?;
                            }
                            write!(f, "({p})")?;
                        }
                        write!(f, "]")?;
                    }
                }
                let write_aggs = |f: &mut fmt::Formatter<'_>, aggs: &[AggSpec]| -> fmt::Result {
                    for (i, a) in aggs.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, " ")?;
                        if let Some(n) = &a.out_name {
                            write!(f, "{n}: ")?;
                        }
                        match &a.func {
                            AggFunc::Count => write!(f, "count(*)")?,
                            AggFunc::Sum(p) => write!(f, "sum({p})")?,
                        }
                    }
                    Ok(())
                };
                if !a.node_aggs.is_empty() {
                    write!(f, " aggregate")?;
                    write_aggs(f, &a.node_aggs)?;
                }
                if !a.edge_aggs.is_empty() {
                    write!(f, " edges aggregate")?;
                    write_aggs(f, &a.edge_aggs)?;
                }
                Ok(())
            }
        }
    }
}
