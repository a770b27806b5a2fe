//! Static operator graphs over difference collections.
//!
//! A dataflow is a DAG of operators. Loops are expressed with `iterate`,
//! which opens a child scope: the loop variable, the body, and any entered
//! outer collections live one timestamp coordinate deeper. Loop bodies may
//! nest.

use std::sync::Arc;

use crate::row::Row;

pub type UnaryFn = Arc<dyn Fn(&Row) -> Row + Send + Sync>;
pub type FlatFn = Arc<dyn Fn(&Row) -> Vec<Row> + Send + Sync>;
pub type PredFn = Arc<dyn Fn(&Row) -> bool + Send + Sync>;
pub type KeyFn = Arc<dyn Fn(&Row) -> Row + Send + Sync>;
pub type JoinFn = Arc<dyn Fn(&Row, &Row, &Row) -> Row + Send + Sync>;
/// Receives the key and the consolidated, sorted group contents (always
/// non-empty, positive multiplicities); returns output rows, one copy each.
pub type ReduceFn = Arc<dyn Fn(&Row, &[(Row, i64)]) -> Vec<Row> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StreamId(pub(crate) usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScopeId(pub(crate) usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterMode {
    /// Run until an iteration produces no differences.
    FixPoint,
    /// Run exactly this many iterations; the output is the state after the
    /// last one.
    Fixed(u32),
}

pub(crate) enum OpKind {
    Input { name: String },
    Constant { rows: Vec<(Row, i64)> },
    Map { f: UnaryFn },
    FlatMap { f: FlatFn },
    Filter { f: PredFn },
    Concat,
    Negate,
    Join { key_left: KeyFn, key_right: KeyFn, out: JoinFn },
    Reduce { key: KeyFn, logic: ReduceFn },
    /// Brings a parent-scope collection into the loop, constant across
    /// iterations.
    Enter,
    /// The loop variable: input 0 is the init collection (parent scope),
    /// input 1 the feedback from the body output (same scope, shifted one
    /// iteration forward).
    LoopVar,
    /// Lives in the parent scope; drives the child scope at each of its own
    /// timestamps and emits the loop's final state.
    IterateDriver { scope: ScopeId, mode: IterMode },
}

impl OpKind {
    pub(crate) fn is_keyed(&self) -> bool {
        matches!(self, OpKind::Join { .. } | OpKind::Reduce { .. })
    }
}

pub(crate) struct OpNode {
    pub kind: OpKind,
    pub scope: ScopeId,
    /// Producer op per input port.
    pub inputs: Vec<StreamId>,
}

pub(crate) struct Scope {
    pub parent: Option<ScopeId>,
    /// Timestamp arity for streams of this scope.
    pub depth: usize,
    pub loop_var: Option<StreamId>,
    pub driver: Option<usize>,
}

pub struct Dataflow {
    pub(crate) ops: Vec<OpNode>,
    pub(crate) scopes: Vec<Scope>,
    pub(crate) output: Option<StreamId>,
    pub(crate) probes: Vec<(StreamId, String)>,
}

impl Dataflow {
    pub fn builder() -> DataflowBuilder {
        DataflowBuilder {
            df: Dataflow {
                ops: Vec::new(),
                scopes: vec![Scope {
                    parent: None,
                    depth: 1,
                    loop_var: None,
                    driver: None,
                }],
                output: None,
                probes: Vec::new(),
            },
            scope_stack: vec![ScopeId(0)],
        }
    }

    pub(crate) fn input_ops(&self) -> Vec<(usize, String)> {
        self.ops
            .iter()
            .enumerate()
            .filter_map(|(i, op)| match &op.kind {
                OpKind::Input { name } => Some((i, name.clone())),
                _ => None,
            })
            .collect()
    }
}

pub struct DataflowBuilder {
    df: Dataflow,
    scope_stack: Vec<ScopeId>,
}

impl DataflowBuilder {
    fn cur_scope(&self) -> ScopeId {
        *self.scope_stack.last().unwrap()
    }

    fn add(&mut self, kind: OpKind, inputs: Vec<StreamId>) -> StreamId {
        self.add_in(self.cur_scope(), kind, inputs)
    }

    fn add_in(&mut self, scope: ScopeId, kind: OpKind, inputs: Vec<StreamId>) -> StreamId {
        let id = StreamId(self.df.ops.len());
        self.df.ops.push(OpNode { kind, scope, inputs });
        id
    }

    fn expect_scope(&self, s: StreamId, scope: ScopeId, what: &str) {
        assert!(
            self.df.ops[s.0].scope == scope,
            "{what} must come from the current scope"
        );
    }

    /// Named external input, fed one view at a time. Root scope only.
    pub fn input(&mut self, name: &str) -> StreamId {
        assert_eq!(self.cur_scope().0, 0, "inputs live in the root scope");
        self.add(
            OpKind::Input {
                name: name.to_string(),
            },
            vec![],
        )
    }

    /// A collection holding fixed rows, present from the first view on.
    pub fn constant(&mut self, rows: Vec<(Row, i64)>) -> StreamId {
        assert_eq!(self.cur_scope().0, 0, "constants live in the root scope");
        self.add(OpKind::Constant { rows }, vec![])
    }

    pub fn map(&mut self, s: StreamId, f: impl Fn(&Row) -> Row + Send + Sync + 'static) -> StreamId {
        self.expect_scope(s, self.cur_scope(), "map input");
        self.add(OpKind::Map { f: Arc::new(f) }, vec![s])
    }

    pub fn flat_map(
        &mut self,
        s: StreamId,
        f: impl Fn(&Row) -> Vec<Row> + Send + Sync + 'static,
    ) -> StreamId {
        self.expect_scope(s, self.cur_scope(), "flat_map input");
        self.add(OpKind::FlatMap { f: Arc::new(f) }, vec![s])
    }

    pub fn filter(
        &mut self,
        s: StreamId,
        f: impl Fn(&Row) -> bool + Send + Sync + 'static,
    ) -> StreamId {
        self.expect_scope(s, self.cur_scope(), "filter input");
        self.add(OpKind::Filter { f: Arc::new(f) }, vec![s])
    }

    pub fn concat(&mut self, streams: &[StreamId]) -> StreamId {
        assert!(!streams.is_empty());
        for &s in streams {
            self.expect_scope(s, self.cur_scope(), "concat input");
        }
        self.add(OpKind::Concat, streams.to_vec())
    }

    pub fn negate(&mut self, s: StreamId) -> StreamId {
        self.expect_scope(s, self.cur_scope(), "negate input");
        self.add(OpKind::Negate, vec![s])
    }

    /// Keyed equi-join; `out` maps (key, left row, right row) to an output
    /// row with multiplicity = product of the sides.
    pub fn join(
        &mut self,
        left: StreamId,
        right: StreamId,
        key_left: impl Fn(&Row) -> Row + Send + Sync + 'static,
        key_right: impl Fn(&Row) -> Row + Send + Sync + 'static,
        out: impl Fn(&Row, &Row, &Row) -> Row + Send + Sync + 'static,
    ) -> StreamId {
        self.expect_scope(left, self.cur_scope(), "join left input");
        self.expect_scope(right, self.cur_scope(), "join right input");
        self.add(
            OpKind::Join {
                key_left: Arc::new(key_left),
                key_right: Arc::new(key_right),
                out: Arc::new(out),
            },
            vec![left, right],
        )
    }

    /// Keyed reduction with a user merge function over the consolidated
    /// group.
    pub fn reduce(
        &mut self,
        s: StreamId,
        key: impl Fn(&Row) -> Row + Send + Sync + 'static,
        logic: impl Fn(&Row, &[(Row, i64)]) -> Vec<Row> + Send + Sync + 'static,
    ) -> StreamId {
        self.expect_scope(s, self.cur_scope(), "reduce input");
        self.add(
            OpKind::Reduce {
                key: Arc::new(key),
                logic: Arc::new(logic),
            },
            vec![s],
        )
    }

    /// Collapses multiplicities to one copy per distinct row.
    pub fn distinct(&mut self, s: StreamId) -> StreamId {
        self.reduce(s, |row| row.clone(), |key, _| vec![key.clone()])
    }

    /// Brings a parent-scope stream into the current loop scope.
    pub fn enter(&mut self, outer: StreamId) -> StreamId {
        let scope = self.cur_scope();
        let parent = self.df.scopes[scope.0]
            .parent
            .expect("enter is only meaningful inside iterate");
        self.expect_scope(outer, parent, "entered stream");
        self.add(OpKind::Enter, vec![outer])
    }

    /// Iterative subcomputation: starts from `init`, repeatedly applies the
    /// body to the loop variable, and yields the final state. The body
    /// closure receives the loop variable stream and returns the body output.
    pub fn iterate(
        &mut self,
        init: StreamId,
        mode: IterMode,
        body: impl FnOnce(&mut DataflowBuilder, StreamId) -> StreamId,
    ) -> StreamId {
        let parent = self.cur_scope();
        self.expect_scope(init, parent, "iterate init");
        let child = ScopeId(self.df.scopes.len());
        self.df.scopes.push(Scope {
            parent: Some(parent),
            depth: self.df.scopes[parent.0].depth + 1,
            loop_var: None,
            driver: None,
        });

        let loop_var = self.add_in(child, OpKind::LoopVar, vec![init]);
        self.df.scopes[child.0].loop_var = Some(loop_var);

        self.scope_stack.push(child);
        let body_out = body(self, loop_var);
        assert!(
            self.df.ops[body_out.0].scope == child,
            "iterate body must return a stream from its own scope"
        );
        self.scope_stack.pop();

        // Feedback edge: the body output becomes the loop variable one
        // iteration later.
        self.df.ops[loop_var.0].inputs.push(body_out);

        let driver = self.add_in(parent, OpKind::IterateDriver { scope: child, mode }, vec![]);
        self.df.scopes[child.0].driver = Some(driver.0);
        driver
    }

    /// Records the full difference trace of a stream under a name.
    pub fn probe(&mut self, s: StreamId, name: &str) {
        self.df.probes.push((s, name.to_string()));
    }

    /// Designates the dataflow's result stream (root scope).
    pub fn output(&mut self, s: StreamId) {
        assert!(
            self.df.ops[s.0].scope.0 == 0,
            "the output stream must live in the root scope"
        );
        self.df.output = Some(s);
    }

    pub fn finish(self) -> Dataflow {
        assert!(self.df.output.is_some(), "dataflow has no output stream");
        self.df
    }
}
