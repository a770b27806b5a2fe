//! Differential execution of a dataflow over a sequence of input views.
//!
//! Every stream is represented purely by its differences, indexed by
//! multi-dimensional timestamps under the product partial order. Linear
//! operators transform differences record by record. Keyed operators (join,
//! reduce) keep a per-key history of their input and output differences: at
//! each timestamp only keys with dirty inputs are reconstructed, recomputed,
//! and differenced against the accumulated output of the timestamp's strict
//! lower set. A key touched at two incomparable timestamps must also be
//! revisited at their least upper bound, so keyed operators maintain the
//! lub-closure of each key's change times and schedule those revisits.
//!
//! The state at timestamp t of any stream is the sum of its differences over
//! { s : s <= t }, which is exactly the reconstruction the per-view output
//! accumulation and the scratch-equivalence tests rely on.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use crate::dataflow::{Dataflow, IterMode, OpKind, ScopeId, StreamId};
use crate::row::Row;
use crate::time::{lub, partial_le, Time};

pub type DiffMap = BTreeMap<Row, i64>;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("iteration exceeded the cap of {cap} at view {view}; the dataflow looks divergent")]
    NonTermination { cap: u32, view: u32 },
    #[error("inconsistent stream: record {record} nets to {net} at view {view}")]
    InconsistentStream {
        record: String,
        net: i64,
        view: usize,
    },
    #[error("unknown input stream `{0}`")]
    UnknownInput(String),
}

#[derive(Debug, Clone)]
pub struct ExecConfig {
    /// Iteration cap for fixpoint loops; exceeding it reports
    /// `NonTermination`.
    pub iter_cap: u32,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig { iter_cap: 1_000_000 }
    }
}

/// Per-view diffs for each named input stream.
#[derive(Debug, Clone, Default)]
pub struct CollectionInput {
    pub views: Vec<HashMap<String, Vec<(Row, i64)>>>,
}

impl CollectionInput {
    /// Input over a single stream name.
    pub fn single(name: &str, views: Vec<Vec<(Row, i64)>>) -> CollectionInput {
        CollectionInput {
            views: views
                .into_iter()
                .map(|diffs| {
                    let mut m = HashMap::new();
                    m.insert(name.to_string(), diffs);
                    m
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }
}

/// Differences of the designated output stream, one set per view.
#[derive(Debug, Clone, Default)]
pub struct OutputDiffStream {
    pub per_view: Vec<Vec<(Row, i64)>>,
}

impl OutputDiffStream {
    /// Sums differences through view `t` and checks every record nets to 0
    /// or 1; the zero-net records are dropped.
    pub fn accumulate(&self, t: usize) -> Result<Vec<Row>, EngineError> {
        assert!(t < self.per_view.len(), "view index out of range");
        let mut net: BTreeMap<&Row, i64> = BTreeMap::new();
        for view in &self.per_view[..=t] {
            for (row, m) in view {
                *net.entry(row).or_insert(0) += m;
            }
        }
        let mut out = Vec::new();
        for (row, m) in net {
            match m {
                0 => {}
                1 => out.push(row.clone()),
                net => {
                    return Err(EngineError::InconsistentStream {
                        record: format!("{row:?}"),
                        net,
                        view: t,
                    })
                }
            }
        }
        Ok(out)
    }

    pub fn total_entries(&self) -> usize {
        self.per_view.iter().map(|v| v.len()).sum()
    }

    pub fn view_count(&self) -> usize {
        self.per_view.len()
    }
}

/// What one view's execution produced.
#[derive(Debug, Clone)]
pub struct ViewSummary {
    pub view: usize,
    pub output_delta: Vec<(Row, i64)>,
    /// Keys recomputed by keyed operators while this view was processed.
    pub work: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Default)]
pub struct RunResult {
    pub output: OutputDiffStream,
    pub work: Vec<u64>,
    pub per_view: Vec<Duration>,
    pub traces: HashMap<String, Vec<(Time, Row, i64)>>,
}

struct KeyedState {
    /// Per input port: key -> differences of records with that key.
    input_index: Vec<HashMap<Row, Vec<(Time, Row, i64)>>>,
    output_index: HashMap<Row, Vec<(Time, Row, i64)>>,
    /// Lub-closed set of times at which each key changed.
    known_times: HashMap<Row, Vec<Time>>,
    /// Keys to revisit at future times.
    scheduled: BTreeMap<Time, BTreeSet<Row>>,
}

impl KeyedState {
    fn new(ports: usize) -> KeyedState {
        KeyedState {
            input_index: (0..ports).map(|_| HashMap::new()).collect(),
            output_index: HashMap::new(),
            known_times: HashMap::new(),
            scheduled: BTreeMap::new(),
        }
    }
}

/// Sums a key's differences over the ideal { s : s <= t }. With the diffs at
/// `t` already appended this is the key's true state at `t` and must be
/// non-negative; before they are appended it is the strict-lower-set sum,
/// which may transiently dip negative (a retraction can be recorded at `t`
/// before the replacement it pairs with).
fn reconstruct(
    index: &HashMap<Row, Vec<(Time, Row, i64)>>,
    key: &Row,
    t: &Time,
    is_state: bool,
) -> Vec<(Row, i64)> {
    let mut acc: BTreeMap<&Row, i64> = BTreeMap::new();
    if let Some(hist) = index.get(key) {
        for (s, row, m) in hist {
            if partial_le(s, t) {
                *acc.entry(row).or_insert(0) += m;
            }
        }
    }
    acc.into_iter()
        .filter(|(_, m)| *m != 0)
        .map(|(row, m)| {
            debug_assert!(
                !is_state || m > 0,
                "negative multiplicity for {row:?} in the state of key {key:?} at {t:?}"
            );
            (row.clone(), m)
        })
        .collect()
}

/// An incremental execution. Feed views one at a time with `step_view`; the
/// adaptive splitter relies on this to measure and decide between views.
pub struct Engine<'a> {
    df: &'a Dataflow,
    cfg: ExecConfig,
    subscribers: Vec<Vec<(usize, usize)>>,
    scope_ops: Vec<Vec<usize>>,
    inbox: Vec<Vec<BTreeMap<Time, DiffMap>>>,
    pending: Vec<BTreeSet<Time>>,
    keyed: Vec<Option<KeyedState>>,
    /// Loop-exit buffers per scope, bucketed by outer time.
    leave_buf: Vec<BTreeMap<Time, DiffMap>>,
    probes: HashMap<usize, Vec<String>>,
    traces: HashMap<String, Vec<(Time, Row, i64)>>,
    input_by_name: HashMap<String, usize>,
    next_view: usize,
    work_current: u64,
    view_for_error: u32,
}

impl<'a> Engine<'a> {
    pub fn new(df: &'a Dataflow, cfg: ExecConfig) -> Engine<'a> {
        let mut subscribers = vec![Vec::new(); df.ops.len()];
        for (op, node) in df.ops.iter().enumerate() {
            for (port, input) in node.inputs.iter().enumerate() {
                subscribers[input.0].push((op, port));
            }
        }
        let mut scope_ops = vec![Vec::new(); df.scopes.len()];
        for (op, node) in df.ops.iter().enumerate() {
            scope_ops[node.scope.0].push(op);
        }
        let inbox = df
            .ops
            .iter()
            .map(|node| vec![BTreeMap::new(); node.inputs.len().max(1)])
            .collect();
        let keyed = df
            .ops
            .iter()
            .map(|node| {
                node.kind
                    .is_keyed()
                    .then(|| KeyedState::new(node.inputs.len()))
            })
            .collect();
        let mut probes: HashMap<usize, Vec<String>> = HashMap::new();
        for (s, name) in &df.probes {
            probes.entry(s.0).or_default().push(name.clone());
        }
        let input_by_name = df
            .input_ops()
            .into_iter()
            .map(|(op, name)| (name, op))
            .collect();
        Engine {
            df,
            cfg,
            subscribers,
            scope_ops,
            inbox,
            pending: vec![BTreeSet::new(); df.scopes.len()],
            keyed,
            leave_buf: vec![BTreeMap::new(); df.scopes.len()],
            probes,
            traces: HashMap::new(),
            input_by_name,
            next_view: 0,
            work_current: 0,
            view_for_error: 0,
        }
    }

    pub fn traces(&self) -> &HashMap<String, Vec<(Time, Row, i64)>> {
        &self.traces
    }

    pub fn views_fed(&self) -> usize {
        self.next_view
    }

    /// Feeds the next view's input diffs and drains all resulting work.
    pub fn step_view(
        &mut self,
        inputs: &HashMap<String, Vec<(Row, i64)>>,
    ) -> Result<ViewSummary, EngineError> {
        let view = self.next_view;
        self.next_view += 1;
        self.view_for_error = view as u32;
        self.work_current = 0;
        let started = Instant::now();

        for name in inputs.keys() {
            if !self.input_by_name.contains_key(name) {
                return Err(EngineError::UnknownInput(name.clone()));
            }
        }
        let t: Time = vec![view as u32];
        // Feed in deterministic name order.
        let mut names: Vec<&String> = inputs.keys().collect();
        names.sort();
        for name in names {
            let op = self.input_by_name[name];
            let slot = self.inbox[op][0].entry(t.clone()).or_default();
            for (row, m) in &inputs[name] {
                *slot.entry(row.clone()).or_insert(0) += m;
            }
            slot.retain(|_, m| *m != 0);
        }
        if view == 0 {
            for (op, node) in self.df.ops.iter().enumerate() {
                if let OpKind::Constant { rows } = &node.kind {
                    let slot = self.inbox[op][0].entry(t.clone()).or_default();
                    for (row, m) in rows {
                        *slot.entry(row.clone()).or_insert(0) += m;
                    }
                    slot.retain(|_, m| *m != 0);
                }
            }
        }

        let mut output_delta = DiffMap::new();
        self.run_time(ScopeId(0), &t, &mut output_delta)?;
        self.pending[0].remove(&t);

        Ok(ViewSummary {
            view,
            output_delta: output_delta.into_iter().collect(),
            work: self.work_current,
            elapsed: started.elapsed(),
        })
    }

    fn insert_pending(&mut self, scope: ScopeId, t: Time) {
        let mut scope = scope;
        let mut t = t;
        loop {
            let inserted = self.pending[scope.0].insert(t.clone());
            match self.df.scopes[scope.0].parent {
                Some(parent) if inserted => {
                    t.pop();
                    scope = parent;
                }
                _ => break,
            }
        }
    }

    fn run_time(
        &mut self,
        scope: ScopeId,
        t: &Time,
        output_delta: &mut DiffMap,
    ) -> Result<(), EngineError> {
        let op_count = self.scope_ops[scope.0].len();
        for i in 0..op_count {
            let op = self.scope_ops[scope.0][i];
            self.process_op(op, t, output_delta)?;
        }
        Ok(())
    }

    /// Drains every pending time of `scope` whose prefix is `prefix`, in
    /// lexicographic (hence product-order-compatible) order.
    fn run_scope(
        &mut self,
        scope: ScopeId,
        prefix: &Time,
        mode: IterMode,
        output_delta: &mut DiffMap,
    ) -> Result<(), EngineError> {
        let mut lo = prefix.clone();
        lo.push(0);
        debug_assert!(
            self.pending[scope.0].range(..lo.clone()).next().is_none(),
            "stale pending work below prefix {prefix:?}"
        );
        loop {
            let next = self.pending[scope.0].range(lo.clone()..).next().cloned();
            let Some(t) = next else { break };
            if t[..prefix.len()] != prefix[..] {
                break;
            }
            if matches!(mode, IterMode::FixPoint) && *t.last().unwrap() > self.cfg.iter_cap {
                return Err(EngineError::NonTermination {
                    cap: self.cfg.iter_cap,
                    view: self.view_for_error,
                });
            }
            self.pending[scope.0].remove(&t);
            self.run_time(scope, &t, output_delta)?;
        }
        Ok(())
    }

    fn process_op(
        &mut self,
        op: usize,
        t: &Time,
        output_delta: &mut DiffMap,
    ) -> Result<(), EngineError> {
        match &self.df.ops[op].kind {
            OpKind::Input { .. } | OpKind::Constant { .. } | OpKind::Concat | OpKind::Enter => {
                let delta = self.drain_merged(op, t);
                self.emit(op, t, delta, output_delta);
            }
            OpKind::Map { f } => {
                let f = f.clone();
                let delta = self.drain_merged(op, t);
                let mut out = DiffMap::new();
                for (row, m) in delta {
                    *out.entry(f(&row)).or_insert(0) += m;
                }
                out.retain(|_, m| *m != 0);
                self.emit(op, t, out, output_delta);
            }
            OpKind::FlatMap { f } => {
                let f = f.clone();
                let delta = self.drain_merged(op, t);
                let mut out = DiffMap::new();
                for (row, m) in delta {
                    for produced in f(&row) {
                        *out.entry(produced).or_insert(0) += m;
                    }
                }
                out.retain(|_, m| *m != 0);
                self.emit(op, t, out, output_delta);
            }
            OpKind::Filter { f } => {
                let f = f.clone();
                let mut delta = self.drain_merged(op, t);
                delta.retain(|row, _| f(row));
                self.emit(op, t, delta, output_delta);
            }
            OpKind::Negate => {
                let delta = self.drain_merged(op, t);
                let out = delta.into_iter().map(|(row, m)| (row, -m)).collect();
                self.emit(op, t, out, output_delta);
            }
            OpKind::LoopVar => {
                let delta = self.drain_merged(op, t);
                if delta.is_empty() {
                    return Ok(());
                }
                // The loop's final state per outer time is the sum of the
                // loop variable's diffs over all iterations.
                let scope = self.df.ops[op].scope;
                let mut outer = t.clone();
                let iter = outer.pop().unwrap();
                let buf = self.leave_buf[scope.0].entry(outer).or_default();
                for (row, m) in &delta {
                    *buf.entry(row.clone()).or_insert(0) += m;
                }
                buf.retain(|_, m| *m != 0);

                self.record_probe(op, t, &delta);
                // Fixed-length loops stop feeding the body after the last
                // iteration; the accumulated state still leaves the loop.
                let driver = self.df.scopes[scope.0].driver.expect("loop has a driver");
                let cut = match self.driver_mode(driver) {
                    IterMode::Fixed(n) => iter >= n,
                    IterMode::FixPoint => false,
                };
                if !cut {
                    self.route(op, t, delta);
                }
            }
            OpKind::IterateDriver { scope, mode } => {
                let (scope, mode) = (*scope, *mode);
                self.run_scope(scope, t, mode, output_delta)?;
                let delta = self.leave_buf[scope.0].remove(t).unwrap_or_default();
                self.emit(op, t, delta, output_delta);
            }
            OpKind::Join { key_left, key_right, out } => {
                let (key_left, key_right, out_fn) =
                    (key_left.clone(), key_right.clone(), out.clone());
                let left = self.inbox[op][0].remove(t).unwrap_or_default();
                let right = self.inbox[op][1].remove(t).unwrap_or_default();
                let state = self.keyed[op].as_mut().expect("join state");
                let mut dirty: BTreeSet<Row> =
                    state.scheduled.remove(t).unwrap_or_default();
                for (row, m) in left {
                    let key = key_left(&row);
                    state.input_index[0]
                        .entry(key.clone())
                        .or_default()
                        .push((t.clone(), row, m));
                    dirty.insert(key);
                }
                for (row, m) in right {
                    let key = key_right(&row);
                    state.input_index[1]
                        .entry(key.clone())
                        .or_default()
                        .push((t.clone(), row, m));
                    dirty.insert(key);
                }
                if dirty.is_empty() {
                    return Ok(());
                }
                self.work_current += dirty.len() as u64;
                let mut out_delta = DiffMap::new();
                for key in dirty {
                    self.note_time(op, &key, t);
                    let state = self.keyed[op].as_ref().unwrap();
                    let lstate = reconstruct(&state.input_index[0], &key, t, true);
                    let rstate = reconstruct(&state.input_index[1], &key, t, true);
                    let mut new = DiffMap::new();
                    for (lrow, lm) in &lstate {
                        for (rrow, rm) in &rstate {
                            *new.entry(out_fn(&key, lrow, rrow)).or_insert(0) += lm * rm;
                        }
                    }
                    new.retain(|_, m| *m != 0);
                    self.apply_keyed_delta(op, &key, t, new, &mut out_delta);
                }
                out_delta.retain(|_, m| *m != 0);
                self.emit(op, t, out_delta, output_delta);
            }
            OpKind::Reduce { key, logic } => {
                let (key_fn, logic) = (key.clone(), logic.clone());
                let incoming = self.inbox[op][0].remove(t).unwrap_or_default();
                let state = self.keyed[op].as_mut().expect("reduce state");
                let mut dirty: BTreeSet<Row> =
                    state.scheduled.remove(t).unwrap_or_default();
                for (row, m) in incoming {
                    let key = key_fn(&row);
                    state.input_index[0]
                        .entry(key.clone())
                        .or_default()
                        .push((t.clone(), row, m));
                    dirty.insert(key);
                }
                if dirty.is_empty() {
                    return Ok(());
                }
                self.work_current += dirty.len() as u64;
                let mut out_delta = DiffMap::new();
                for key in dirty {
                    self.note_time(op, &key, t);
                    let state = self.keyed[op].as_ref().unwrap();
                    let group = reconstruct(&state.input_index[0], &key, t, true);
                    let mut new = DiffMap::new();
                    if !group.is_empty() {
                        for row in logic(&key, &group) {
                            *new.entry(row).or_insert(0) += 1;
                        }
                    }
                    self.apply_keyed_delta(op, &key, t, new, &mut out_delta);
                }
                out_delta.retain(|_, m| *m != 0);
                self.emit(op, t, out_delta, output_delta);
            }
        }
        Ok(())
    }

    fn driver_mode(&self, driver: usize) -> IterMode {
        match &self.df.ops[driver].kind {
            OpKind::IterateDriver { mode, .. } => *mode,
            _ => unreachable!("scope driver is an IterateDriver"),
        }
    }

    /// Differences the freshly recomputed per-key output against the
    /// accumulated output of the strict lower set, records it, and folds it
    /// into the operator's outgoing delta.
    fn apply_keyed_delta(
        &mut self,
        op: usize,
        key: &Row,
        t: &Time,
        new: DiffMap,
        out_delta: &mut DiffMap,
    ) {
        let state = self.keyed[op].as_mut().unwrap();
        let prev = reconstruct(&state.output_index, key, t, false);
        let mut delta = new;
        for (row, m) in prev {
            *delta.entry(row).or_insert(0) -= m;
        }
        delta.retain(|_, m| *m != 0);
        if delta.is_empty() {
            return;
        }
        let hist = state.output_index.entry(key.clone()).or_default();
        for (row, m) in &delta {
            hist.push((t.clone(), row.clone(), *m));
            *out_delta.entry(row.clone()).or_insert(0) += m;
        }
    }

    /// Adds `t` to the key's change-time set and schedules recomputation at
    /// every new least upper bound the addition creates.
    fn note_time(&mut self, op: usize, key: &Row, t: &Time) {
        let scope = self.df.ops[op].scope;
        let mut queue = vec![t.clone()];
        while let Some(cand) = queue.pop() {
            let state = self.keyed[op].as_mut().unwrap();
            let known = state.known_times.entry(key.clone()).or_default();
            if known.contains(&cand) {
                continue;
            }
            known.push(cand.clone());
            let snapshot = known.clone();
            if cand != *t {
                state
                    .scheduled
                    .entry(cand.clone())
                    .or_default()
                    .insert(key.clone());
                self.insert_pending(scope, cand.clone());
            }
            for s in snapshot {
                let l = lub(&s, &cand);
                if l != s && l != cand {
                    queue.push(l);
                }
            }
        }
    }

    fn drain_merged(&mut self, op: usize, t: &Time) -> DiffMap {
        let ports = self.inbox[op].len();
        let mut merged = DiffMap::new();
        for port in 0..ports {
            if let Some(d) = self.inbox[op][port].remove(t) {
                for (row, m) in d {
                    *merged.entry(row).or_insert(0) += m;
                }
            }
        }
        merged.retain(|_, m| *m != 0);
        merged
    }

    fn record_probe(&mut self, op: usize, t: &Time, delta: &DiffMap) {
        if let Some(names) = self.probes.get(&op) {
            let names = names.clone();
            for name in names {
                let trace = self.traces.entry(name).or_default();
                for (row, m) in delta {
                    trace.push((t.clone(), row.clone(), *m));
                }
            }
        }
    }

    fn emit(&mut self, op: usize, t: &Time, delta: DiffMap, output_delta: &mut DiffMap) {
        if delta.is_empty() {
            return;
        }
        self.record_probe(op, t, &delta);
        if self.df.output == Some(StreamId(op)) {
            for (row, m) in &delta {
                *output_delta.entry(row.clone()).or_insert(0) += m;
            }
            output_delta.retain(|_, m| *m != 0);
        }
        self.route(op, t, delta);
    }

    /// Delivers a produced delta to each subscriber, translating timestamps
    /// across scope boundaries.
    fn route(&mut self, producer: usize, t: &Time, delta: DiffMap) {
        let subs = self.subscribers[producer].clone();
        for (consumer, port) in subs {
            match &self.df.ops[consumer].kind {
                OpKind::Enter => {
                    let mut inner = t.clone();
                    inner.push(0);
                    self.deliver(consumer, port, inner, &delta, 1);
                }
                OpKind::LoopVar if port == 0 => {
                    // Init: insert at iteration 0, retract at iteration 1 so
                    // the body output fully replaces it from there on.
                    let mut at0 = t.clone();
                    at0.push(0);
                    let mut at1 = t.clone();
                    at1.push(1);
                    self.deliver(consumer, port, at0, &delta, 1);
                    self.deliver(consumer, port, at1, &delta, -1);
                }
                OpKind::LoopVar => {
                    // Feedback advances one iteration.
                    let mut next = t.clone();
                    *next.last_mut().unwrap() += 1;
                    self.deliver(consumer, port, next, &delta, 1);
                }
                _ => {
                    self.deliver(consumer, port, t.clone(), &delta, 1);
                }
            }
        }
    }

    fn deliver(&mut self, consumer: usize, port: usize, t: Time, delta: &DiffMap, sign: i64) {
        let slot = self.inbox[consumer][port].entry(t.clone()).or_default();
        for (row, m) in delta {
            *slot.entry(row.clone()).or_insert(0) += m * sign;
        }
        slot.retain(|_, m| *m != 0);
        let scope = self.df.ops[consumer].scope;
        self.insert_pending(scope, t);
    }
}

/// Runs the dataflow on a single materialized view: a one-view collection.
pub fn run_on_view(
    df: &Dataflow,
    edges_input: &str,
    edges: &[(Row, i64)],
    cfg: &ExecConfig,
) -> Result<Vec<Row>, EngineError> {
    let input = CollectionInput::single(edges_input, vec![edges.to_vec()]);
    let result = run_on_collection(df, &input, cfg)?;
    result.output.accumulate(0)
}

/// Runs the dataflow across all views of the collection, sharing work
/// between consecutive views through the difference indices.
pub fn run_on_collection(
    df: &Dataflow,
    input: &CollectionInput,
    cfg: &ExecConfig,
) -> Result<RunResult, EngineError> {
    let mut engine = Engine::new(df, cfg.clone());
    let mut result = RunResult::default();
    for view_inputs in &input.views {
        let summary = engine.step_view(view_inputs)?;
        result.output.per_view.push(summary.output_delta);
        result.work.push(summary.work);
        result.per_view.push(summary.elapsed);
    }
    result.traces = engine.traces().clone();
    Ok(result)
}
