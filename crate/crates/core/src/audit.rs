//! Instrumented accessors used to prove that no fit ever sees validation or
//! test data.
//!
//! Every training read goes through [`Guarded::window`], which records the
//! exclusive end of the slice handed out and the first index that fit is not
//! allowed to see. The held-out test panel is wrapped in [`HeldOut`], which
//! only hands out its contents to the evaluation stage without flagging a
//! violation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::series::SeriesMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub context: String,
    pub end: usize,
    pub limit: usize,
}

/// Thread-safe record of audited reads.
#[derive(Debug, Default)]
pub struct AccessLog {
    reads: AtomicUsize,
    violations: Mutex<Vec<Violation>>,
}

impl AccessLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a read of `[0, end)` by a fit that must not see index
    /// `limit` or later.
    pub fn record(&self, context: &str, end: usize, limit: usize) {
        self.reads.fetch_add(1, Ordering::Relaxed);
        if end > limit {
            self.violations.lock().expect("log poisoned").push(Violation {
                context: context.to_string(),
                end,
                limit,
            });
        }
    }

    pub fn reads(&self) -> usize {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn violations(&self) -> Vec<Violation> {
        self.violations.lock().expect("log poisoned").clone()
    }
}

/// A series whose prefix reads are reported to an optional [`AccessLog`].
#[derive(Debug, Clone, Copy)]
pub struct Guarded<'a> {
    data: &'a [f64],
    log: Option<&'a AccessLog>,
    label: &'a str,
}

impl<'a> Guarded<'a> {
    pub fn new(data: &'a [f64], label: &'a str, log: Option<&'a AccessLog>) -> Self {
        Self { data, log, label }
    }

    pub fn unaudited(data: &'a [f64]) -> Self {
        Self {
            data,
            log: None,
            label: "",
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn label(&self) -> &'a str {
        self.label
    }

    /// Prefix `[0, end)` handed to a fit whose first forbidden index is
    /// `limit`.
    pub fn window(&self, end: usize, limit: usize) -> &'a [f64] {
        if let Some(log) = self.log {
            log.record(self.label, end, limit);
        }
        &self.data[..end]
    }

    /// Unrestricted access for scoring against held-out blocks.
    pub fn score_slice(&self, range: std::ops::Range<usize>) -> &'a [f64] {
        &self.data[range]
    }
}

/// Pipeline stage requesting the held-out panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Factorize,
    Select,
    Forecast,
    Evaluate,
}

/// Test window that is only legitimately read at evaluation time.
#[derive(Debug)]
pub struct HeldOut<'a> {
    panel: SeriesMatrix,
    log: &'a AccessLog,
}

impl<'a> HeldOut<'a> {
    pub fn new(panel: SeriesMatrix, log: &'a AccessLog) -> Self {
        Self { panel, log }
    }

    pub fn open(&self, stage: Stage) -> &SeriesMatrix {
        let ok = stage == Stage::Evaluate;
        self.log.record(
            &format!("held-out read during {stage:?}"),
            usize::from(!ok),
            0,
        );
        &self.panel
    }

    pub fn n_series(&self) -> usize {
        self.panel.n_series()
    }

    pub fn horizon(&self) -> usize {
        self.panel.n_cols()
    }
}
