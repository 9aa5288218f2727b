use std::fmt::Debug;

use thiserror::Error;

use crate::density::DensityField;
use crate::error::TopOptError;

/// One row of the convergence history.
///
/// `compliance` belongs to the design analysed in that iteration; the
/// remaining columns describe the design produced by its update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRow<T = f64> {
    pub iter: usize,
    pub compliance: T,
    pub volfrac: T,
    pub change: T,
    pub checkerboard_index: T,
}

/// Per-iteration history of an optimization run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OptRecord<T = f64> {
    pub rows: Vec<IterationRow<T>>,
}

impl<T: Copy> OptRecord<T> {
    pub fn new() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn push(&mut self, row: IterationRow<T>) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRow<T>> {
        self.rows.last()
    }

    pub fn compliances(&self) -> impl Iterator<Item = T> + '_ {
        self.rows.iter().map(|r| r.compliance)
    }
}

/// Final design of a run together with its history.
#[derive(Clone, Debug, PartialEq)]
pub struct OptOutcome<T = f64> {
    pub density: DensityField<T>,
    pub record: OptRecord<T>,
    /// `false` when the run stopped at the iteration cap.
    pub converged: bool,
}

/// A failed run keeps the history accumulated before the failure.
#[derive(Debug, Error)]
#[error("optimization aborted after {} iterations: {source}", record.len())]
pub struct RunError<T: Debug + Copy = f64> {
    #[source]
    pub source: TopOptError,
    pub record: OptRecord<T>,
}

impl<T: Debug + Copy> RunError<T> {
    pub(crate) fn new(source: TopOptError, record: OptRecord<T>) -> Self {
        Self { source, record }
    }
}
