//! Recursive-descent parser for the view definition language.
//!
//! Keywords are case-insensitive; identifiers are case-sensitive.
//! Operator precedence is NOT > AND > OR, with parentheses allowed.

use super::ast::*;
use super::lexer::{tokenize, Spanned, SyntaxError, Tok};
use crate::value::PropertyValue;

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown statement: expected `create view`")]
    UnknownStatement,
}

pub fn parse(text: &str) -> Result<Statement, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let stmt = p.statement()?;
    if let Some(t) = p.peek() {
        return Err(p.err_at(t.clone(), "trailing input after statement").into());
    }
    Ok(stmt)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, t: Spanned, message: &str) -> SyntaxError {
        SyntaxError {
            line: t.line,
            col: t.col,
            message: format!("{message}, found {}", t.tok),
        }
    }

    fn err_eof(&self, message: &str) -> SyntaxError {
        let (line, col) = self
            .toks
            .last()
            .map(|t| (t.line, t.col + 1))
            .unwrap_or((1, 1));
        SyntaxError {
            line,
            col,
            message: format!("{message}, found end of input"),
        }
    }

    /// True if the next token is the given case-insensitive keyword.
    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Ident(s), .. }) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            match self.peek().cloned() {
                Some(t) => Err(self.err_at(t, &format!("expected `{kw}`"))),
                None => Err(self.err_eof(&format!("expected `{kw}`"))),
            }
        }
    }

    fn expect_tok(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        match self.next() {
            Some(t) if t.tok == tok => Ok(()),
            Some(t) => Err(self.err_at(t, &format!("expected {tok}"))),
            None => Err(self.err_eof(&format!("expected {tok}"))),
        }
    }

    /// A case-sensitive identifier (view names, graph names, properties).
    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.next() {
            Some(Spanned { tok: Tok::Ident(s), .. }) => Ok(s),
            Some(t) => Err(self.err_at(t, &format!("expected {what}"))),
            None => Err(self.err_eof(&format!("expected {what}"))),
        }
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        if !(self.at_kw("create")) {
            return Err(ParseError::UnknownStatement);
        }
        self.pos += 1;
        if !self.eat_kw("view") {
            return Err(ParseError::UnknownStatement);
        }
        if self.eat_kw("collection") {
            return Ok(Statement::Collection(self.collection()?));
        }
        let name = self.ident("a view name")?;
        self.expect_kw("on")?;
        let graph = self.ident("a graph name")?;
        if self.eat_kw("edges") {
            self.expect_kw("where")?;
            let predicate = self.pred()?;
            return Ok(Statement::View(ViewDef {
                name,
                graph,
                predicate,
            }));
        }
        if self.eat_kw("nodes") {
            return Ok(Statement::Aggregate(self.aggregate(name, graph)?));
        }
        match self.peek().cloned() {
            Some(t) => Err(self.err_at(t, "expected `edges where` or `nodes group by`").into()),
            None => Err(self.err_eof("expected `edges where` or `nodes group by`").into()),
        }
    }

    fn collection(&mut self) -> Result<ViewCollectionDef, SyntaxError> {
        let name = self.ident("a collection name")?;
        self.expect_kw("on")?;
        let graph = self.ident("a graph name")?;
        let mut views = Vec::new();
        loop {
            self.expect_tok(Tok::LBracket)?;
            let vname = self.ident("a view name")?;
            self.expect_tok(Tok::Colon)?;
            let pred = self.pred()?;
            self.expect_tok(Tok::RBracket)?;
            views.push((vname, pred));
            if !matches!(self.peek(), Some(Spanned { tok: Tok::Comma, .. })) {
                break;
            }
            self.pos += 1;
        }
        Ok(ViewCollectionDef { name, graph, views })
    }

    fn aggregate(&mut self, name: String, graph: String) -> Result<AggregateViewDef, SyntaxError> {
        self.expect_kw("group")?;
        self.expect_kw("by")?;
        let grouping = if matches!(self.peek(), Some(Spanned { tok: Tok::LBracket, .. })) {
            self.pos += 1;
            let mut preds = Vec::new();
            loop {
                self.expect_tok(Tok::LParen)?;
                preds.push(self.pred()?);
                self.expect_tok(Tok::RParen)?;
                if !matches!(self.peek(), Some(Spanned { tok: Tok::Comma, .. })) {
                    break;
                }
                self.pos += 1;
            }
            self.expect_tok(Tok::RBracket)?;
            Grouping::ByPredicates(preds)
        } else {
            let mut props = vec![self.group_prop()?];
            while matches!(self.peek(), Some(Spanned { tok: Tok::Comma, .. })) {
                self.pos += 1;
                props.push(self.group_prop()?);
            }
            Grouping::ByProps(props)
        };

        let mut node_aggs = Vec::new();
        if self.eat_kw("aggregate") {
            node_aggs = self.aggs()?;
        }
        let mut edge_aggs = Vec::new();
        let mut had_edges_clause = false;
        if self.eat_kw("edges") {
            self.expect_kw("aggregate")?;
            edge_aggs = self.aggs()?;
            had_edges_clause = true;
        }
        // Without an explicit edges clause, a trailing aggregate describes the
        // super-edges (the connectivity summary), not the groups themselves.
        if !had_edges_clause && !node_aggs.is_empty() {
            edge_aggs = std::mem::take(&mut node_aggs);
        }
        Ok(AggregateViewDef {
            name,
            graph,
            grouping,
            node_aggs,
            edge_aggs,
        })
    }

    /// A group-by property name; stops before `aggregate`/`edges` keywords.
    fn group_prop(&mut self) -> Result<String, SyntaxError> {
        if self.at_kw("aggregate") || self.at_kw("edges") {
            let t = self.peek().cloned().unwrap();
            return Err(self.err_at(t, "expected a property name"));
        }
        self.ident("a property name")
    }

    fn aggs(&mut self) -> Result<Vec<AggSpec>, SyntaxError> {
        let mut out = vec![self.agg()?];
        while matches!(self.peek(), Some(Spanned { tok: Tok::Comma, .. })) {
            self.pos += 1;
            out.push(self.agg()?);
        }
        Ok(out)
    }

    fn agg(&mut self) -> Result<AggSpec, SyntaxError> {
        // Either `name: func` or bare `func`, where func is count(*)/sum(prop).
        let mut out_name = None;
        if let Some(Spanned { tok: Tok::Ident(s), .. }) = self.peek() {
            let is_func = s.eq_ignore_ascii_case("count") || s.eq_ignore_ascii_case("sum");
            let followed_by_colon =
                matches!(self.toks.get(self.pos + 1), Some(Spanned { tok: Tok::Colon, .. }));
            if followed_by_colon && !is_func {
                out_name = Some(self.ident("an aggregate name")?);
                self.pos += 1; // colon
            }
        }
        if self.eat_kw("count") {
            self.expect_tok(Tok::LParen)?;
            self.expect_tok(Tok::Star)?;
            self.expect_tok(Tok::RParen)?;
            return Ok(AggSpec {
                out_name,
                func: AggFunc::Count,
            });
        }
        if self.eat_kw("sum") {
            self.expect_tok(Tok::LParen)?;
            let prop = self.ident("a property name")?;
            self.expect_tok(Tok::RParen)?;
            return Ok(AggSpec {
                out_name,
                func: AggFunc::Sum(prop),
            });
        }
        match self.peek().cloned() {
            Some(t) => Err(self.err_at(t, "expected count(*) or sum(prop)")),
            None => Err(self.err_eof("expected count(*) or sum(prop)")),
        }
    }

    // Predicates: or_expr := and_expr { OR and_expr }
    fn pred(&mut self) -> Result<Pred, SyntaxError> {
        let mut lhs = self.and_expr()?;
        while self.eat_kw("or") {
            let rhs = self.and_expr()?;
            lhs = Pred::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Pred, SyntaxError> {
        let mut lhs = self.not_expr()?;
        while self.eat_kw("and") {
            let rhs = self.not_expr()?;
            lhs = Pred::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Pred, SyntaxError> {
        if self.eat_kw("not") {
            let inner = self.not_expr()?;
            return Ok(Pred::Not(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Pred, SyntaxError> {
        if matches!(self.peek(), Some(Spanned { tok: Tok::LParen, .. })) {
            self.pos += 1;
            let inner = self.pred()?;
            self.expect_tok(Tok::RParen)?;
            return Ok(inner);
        }
        let lhs = self.operand()?;
        let op = self.cmp_op()?;
        let rhs = self.operand()?;
        Ok(Pred::Cmp { lhs, op, rhs })
    }

    fn cmp_op(&mut self) -> Result<CmpOp, SyntaxError> {
        let t = match self.next() {
            Some(t) => t,
            None => return Err(self.err_eof("expected a comparison operator")),
        };
        match t.tok {
            Tok::Eq => Ok(CmpOp::Eq),
            Tok::Ne => Ok(CmpOp::Ne),
            Tok::Lt => Ok(CmpOp::Lt),
            Tok::Le => Ok(CmpOp::Le),
            Tok::Gt => Ok(CmpOp::Gt),
            Tok::Ge => Ok(CmpOp::Ge),
            _ => Err(self.err_at(t, "expected a comparison operator")),
        }
    }

    fn operand(&mut self) -> Result<Operand, SyntaxError> {
        let t = match self.next() {
            Some(t) => t,
            None => return Err(self.err_eof("expected an operand")),
        };
        match t.tok {
            Tok::Int(v) => Ok(Operand::Lit(PropertyValue::Int(v))),
            Tok::Str(s) => Ok(Operand::Lit(PropertyValue::Str(s))),
            Tok::Ident(s) if s.eq_ignore_ascii_case("true") => {
                Ok(Operand::Lit(PropertyValue::Bool(true)))
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("false") => {
                Ok(Operand::Lit(PropertyValue::Bool(false)))
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("id") => Ok(Operand::EdgeId),
            Tok::Ident(s) if s.eq_ignore_ascii_case("src") || s.eq_ignore_ascii_case("dst") => {
                if matches!(self.peek(), Some(Spanned { tok: Tok::Dot, .. })) {
                    self.pos += 1;
                    let prop = self.ident("a property name after `.`")?;
                    if s.eq_ignore_ascii_case("src") {
                        Ok(Operand::SrcProp(prop))
                    } else {
                        Ok(Operand::DstProp(prop))
                    }
                } else {
                    // A bare property that happens to be called src/dst.
                    Ok(Operand::Prop(s))
                }
            }
            Tok::Ident(s) => Ok(Operand::Prop(s)),
            _ => Err(self.err_at(t, "expected an operand")),
        }
    }
}
