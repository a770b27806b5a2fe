//! Adaptive collection splitting: decide per batch of views whether to keep
//! maintaining results differentially or to restart from scratch.
//!
//! The optimizer observes (input size, cost) pairs separately for scratch
//! and differential runs, fits a least-squares line to each, predicts both
//! costs for the upcoming batch, and picks the cheaper mode. A scratch
//! decision starts a fresh engine epoch fed with the full view.

use std::collections::HashMap;

use crate::dataflow::Dataflow;
use crate::exec::{CollectionInput, DiffMap, Engine, EngineError, ExecConfig, OutputDiffStream};
use crate::row::Row;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Differential,
    Scratch,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Differential => "diff",
            Mode::Scratch => "scratch",
        }
    }
}

/// Which measurement feeds the cost models. Wall time is the production
/// signal; deterministic work counts are available for tests where timing at
/// small scale is all noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostSignal {
    WallTime,
    WorkCount,
}

#[derive(Debug, thiserror::Error)]
pub enum SplitError {
    #[error("cost model is cold: both modes need at least one observation")]
    ColdModel,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// One fitted line per mode over (size, cost) observations.
#[derive(Debug, Clone, Default)]
pub struct CostModel {
    scratch: Vec<(f64, f64)>,
    differential: Vec<(f64, f64)>,
}

fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    match points.len() {
        0 => None,
        1 => {
            // Proportional through the origin; a zero-size point degenerates
            // to a constant prediction.
            let (s, t) = points[0];
            if s == 0.0 {
                Some((0.0, t))
            } else {
                Some((t / s, 0.0))
            }
        }
        n => {
            let n = n as f64;
            let sx: f64 = points.iter().map(|p| p.0).sum();
            let sy: f64 = points.iter().map(|p| p.1).sum();
            let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
            let denom = n * sxx - sx * sx;
            if denom.abs() < 1e-12 {
                // All observations at one size: predict their mean.
                Some((0.0, sy / n))
            } else {
                let slope = (n * sxy - sx * sy) / denom;
                let intercept = (sy - slope * sx) / n;
                Some((slope, intercept))
            }
        }
    }
}

impl CostModel {
    pub fn record(&mut self, mode: Mode, size: f64, cost: f64) {
        debug_assert!(size >= 0.0 && cost >= 0.0);
        match mode {
            Mode::Scratch => self.scratch.push((size, cost)),
            Mode::Differential => self.differential.push((size, cost)),
        }
    }

    pub fn line(&self, mode: Mode) -> Option<(f64, f64)> {
        match mode {
            Mode::Scratch => fit_line(&self.scratch),
            Mode::Differential => fit_line(&self.differential),
        }
    }

    /// Predicted cost, clamped at zero.
    pub fn predict(&self, mode: Mode, size: f64) -> Option<f64> {
        self.line(mode)
            .map(|(slope, intercept)| (slope * size + intercept).max(0.0))
    }

    /// Picks the cheaper predicted mode; ties go differential, which avoids
    /// re-ingesting the full view.
    pub fn decide(&self, view_size: f64, diff_size: f64) -> Result<Mode, SplitError> {
        let scratch = self
            .predict(Mode::Scratch, view_size)
            .ok_or(SplitError::ColdModel)?;
        let differential = self
            .predict(Mode::Differential, diff_size)
            .ok_or(SplitError::ColdModel)?;
        if differential <= scratch {
            Ok(Mode::Differential)
        } else {
            Ok(Mode::Scratch)
        }
    }

    pub fn observation_count(&self, mode: Mode) -> usize {
        match mode {
            Mode::Scratch => self.scratch.len(),
            Mode::Differential => self.differential.len(),
        }
    }
}

/// Per-view record of what the splitter did.
#[derive(Debug, Clone)]
pub struct RunLogEntry {
    pub view: usize,
    pub decision: Mode,
    /// Input size the decision's execution consumed (diff size or full view
    /// size).
    pub size: u64,
    /// Measured cost in the configured signal.
    pub cost: f64,
    pub work: u64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunLog {
    pub entries: Vec<RunLogEntry>,
}

impl RunLog {
    /// Views at which a fresh scratch epoch started (view 0 excluded: every
    /// run ingests its first view whole).
    pub fn split_points(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| e.view > 0 && e.decision == Mode::Scratch)
            .map(|e| e.view)
            .collect()
    }

    pub fn total_work(&self) -> u64 {
        self.entries.iter().map(|e| e.work).sum()
    }
}

#[derive(Debug)]
pub struct AdaptiveResult {
    pub output: OutputDiffStream,
    pub log: RunLog,
}

/// Executes the collection with a forced per-view plan. `plan[0]` is always
/// treated as scratch (the first view is ingested whole by construction).
/// Output differences are reported against the views' true states, so
/// accumulation behaves identically however the collection was split.
pub fn run_plan(
    df: &Dataflow,
    input: &CollectionInput,
    input_name: &str,
    plan: &[Mode],
    cfg: &ExecConfig,
) -> Result<AdaptiveResult, SplitError> {
    let mut driver = SplitDriver::new(df, input, input_name, cfg);
    for v in 0..input.len() {
        let mode = if v == 0 { Mode::Scratch } else { plan[v] };
        driver.step(mode)?;
    }
    Ok(driver.finish())
}

/// The adaptive optimizer: view 0 runs from scratch and view 1
/// differentially (warmup), then decisions are made for `batch` views at a
/// time using the batch's total diff size against its last view's size.
/// A scratch decision splits the collection once, at the batch head; the
/// rest of the batch runs differentially in the new epoch.
pub fn run_adaptive(
    df: &Dataflow,
    input: &CollectionInput,
    input_name: &str,
    batch: usize,
    signal: CostSignal,
    cfg: &ExecConfig,
) -> Result<AdaptiveResult, SplitError> {
    assert!(batch >= 1, "batch size must be at least 1");
    assert!(input.len() >= 2, "adaptive execution needs at least 2 views");
    let mut model = CostModel::default();
    let mut driver = SplitDriver::new(df, input, input_name, cfg).with_signal(signal);

    // Warmup protocol: the decisions for the first two views are fixed.
    let first = driver.step(Mode::Scratch)?;
    model.record(Mode::Scratch, first.size as f64, first.cost);
    let second = driver.step(Mode::Differential)?;
    model.record(Mode::Differential, second.size as f64, second.cost);

    let mut v = 2;
    while v < input.len() {
        let hi = (v + batch).min(input.len());
        let batch_diffs: u64 = (v..hi).map(|i| driver.diff_size(i)).sum();
        let last_view_size = driver.view_size(hi - 1);
        let mode = model.decide(last_view_size as f64, batch_diffs as f64)?;
        for i in v..hi {
            let step_mode = if mode == Mode::Scratch && i == v {
                Mode::Scratch
            } else {
                Mode::Differential
            };
            let entry = driver.step(step_mode)?;
            model.record(step_mode, entry.size as f64, entry.cost);
        }
        v = hi;
    }
    Ok(driver.finish())
}

/// Shared execution machinery: tracks the running view state so a scratch
/// restart can ingest the full view, and rebases each epoch's output
/// differences onto the global output stream.
struct SplitDriver<'a> {
    df: &'a Dataflow,
    input: &'a CollectionInput,
    input_name: String,
    cfg: ExecConfig,
    signal_views: Vec<Vec<(Row, i64)>>,
    engine: Engine<'a>,
    /// Running input state (the current view's edge multiset).
    state: DiffMap,
    /// Output state accumulated inside the current epoch.
    epoch_out: DiffMap,
    /// Output state of the previously emitted view, across epochs.
    global_out: DiffMap,
    next: usize,
    output: OutputDiffStream,
    log: RunLog,
    signal: CostSignal,
}

impl<'a> SplitDriver<'a> {
    fn new(
        df: &'a Dataflow,
        input: &'a CollectionInput,
        input_name: &str,
        cfg: &ExecConfig,
    ) -> SplitDriver<'a> {
        let signal_views = input
            .views
            .iter()
            .map(|m| m.get(input_name).cloned().unwrap_or_default())
            .collect();
        SplitDriver {
            df,
            input,
            input_name: input_name.to_string(),
            cfg: cfg.clone(),
            signal_views,
            engine: Engine::new(df, cfg.clone()),
            state: DiffMap::new(),
            epoch_out: DiffMap::new(),
            global_out: DiffMap::new(),
            next: 0,
            output: OutputDiffStream::default(),
            log: RunLog::default(),
            signal: CostSignal::WallTime,
        }
    }

    fn with_signal(mut self, signal: CostSignal) -> Self {
        self.signal = signal;
        self
    }

    fn diff_size(&self, view: usize) -> u64 {
        self.signal_views[view]
            .iter()
            .map(|(_, m)| m.unsigned_abs())
            .sum()
    }

    fn view_size(&self, view: usize) -> u64 {
        // |GV_view| = running sum of diffs through that view.
        let mut state: DiffMap = DiffMap::new();
        for v in &self.signal_views[..=view] {
            for (row, m) in v {
                *state.entry(row.clone()).or_insert(0) += m;
            }
        }
        state.values().map(|m| m.unsigned_abs()).sum()
    }

    fn step(&mut self, mode: Mode) -> Result<RunLogEntry, SplitError> {
        let view = self.next;
        self.next += 1;

        // Advance the running input state.
        for (row, m) in &self.signal_views[view] {
            *self.state.entry(row.clone()).or_insert(0) += m;
        }
        self.state.retain(|_, m| *m != 0);

        let (summary, size) = match mode {
            Mode::Differential => {
                let diffs = &self.input.views[view];
                let size = self.diff_size(view);
                (self.engine.step_view(diffs)?, size)
            }
            Mode::Scratch => {
                // Fresh epoch: a new engine ingests the full view state.
                self.engine = Engine::new(self.df, self.cfg.clone());
                self.epoch_out.clear();
                let full: Vec<(Row, i64)> =
                    self.state.iter().map(|(r, m)| (r.clone(), *m)).collect();
                let size: u64 = full.iter().map(|(_, m)| m.unsigned_abs()).sum();
                let mut inputs: HashMap<String, Vec<(Row, i64)>> =
                    self.input.views[view].clone();
                inputs.insert(self.input_name.clone(), full);
                (self.engine.step_view(&inputs)?, size)
            }
        };

        // Fold the epoch-local delta into the epoch state, then emit the
        // global per-view delta relative to the previous view's true output.
        for (row, m) in &summary.output_delta {
            *self.epoch_out.entry(row.clone()).or_insert(0) += m;
        }
        self.epoch_out.retain(|_, m| *m != 0);
        let mut global_delta = self.epoch_out.clone();
        for (row, m) in &self.global_out {
            *global_delta.entry(row.clone()).or_insert(0) -= m;
        }
        global_delta.retain(|_, m| *m != 0);
        self.global_out = self.epoch_out.clone();
        self.output
            .per_view
            .push(global_delta.into_iter().collect());

        let elapsed_ms = summary.elapsed.as_secs_f64() * 1e3;
        let cost = match self.signal {
            CostSignal::WallTime => summary.elapsed.as_secs_f64(),
            CostSignal::WorkCount => summary.work as f64,
        };
        let entry = RunLogEntry {
            view,
            decision: mode,
            size,
            cost,
            work: summary.work,
            elapsed_ms,
        };
        self.log.entries.push(entry.clone());
        Ok(entry)
    }

    fn finish(self) -> AdaptiveResult {
        AdaptiveResult {
            output: self.output,
            log: self.log,
        }
    }
}
