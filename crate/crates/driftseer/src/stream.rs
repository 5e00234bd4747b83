//! Core stream types shared by the whole pipeline: data points, the sliding
//! window `W` of recent unlabeled points, and the fixed-capacity memory `M`
//! of expert-labeled points.

use std::collections::VecDeque;

use thiserror::Error;

/// Class identifier. Tasks use small dense ids; binary tasks use `{0, 1}`
/// with `1` as the positive class.
pub type ClassId = u32;

#[derive(Debug, Error, PartialEq)]
pub enum StreamError {
    #[error("point index {got} is not greater than the last buffered index {last}")]
    NonMonotonicIndex { last: u64, got: u64 },
    #[error("feature vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// One stream instance: a feature vector plus its position in the stream.
///
/// A point generated from a benchmark carries its ground-truth label, but
/// that label is deliberately unreadable through the public API. Only the
/// label oracle and the evaluator (the `pipeline` and `eval` modules) can
/// see it, so detectors and models cannot accidentally peek at labels.
///
/// Identity is the stream position: two points are equal iff their indices
/// are equal, which is what keeps window and memory membership well defined.
#[derive(Debug, Clone)]
pub struct DataPoint {
    index: u64,
    features: Vec<f64>,
    true_label: Option<ClassId>,
}

impl DataPoint {
    pub fn new(index: u64, features: Vec<f64>) -> Self {
        debug_assert!(features.iter().all(|v| v.is_finite()));
        Self {
            index,
            features,
            true_label: None,
        }
    }

    /// A point whose ground truth is known at creation time (generators,
    /// CSV ingestion). The label stays hidden from the pipeline.
    pub fn labeled(index: u64, features: Vec<f64>, label: ClassId) -> Self {
        debug_assert!(features.iter().all(|v| v.is_finite()));
        Self {
            index,
            features,
            true_label: Some(label),
        }
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    /// Oracle/evaluator access to the hidden label.
    pub(crate) fn truth(&self) -> Option<ClassId> {
        self.true_label
    }
}

impl PartialEq for DataPoint {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index
    }
}

impl Eq for DataPoint {}

impl std::hash::Hash for DataPoint {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.index.hash(state);
    }
}

/// A data point together with an expert-provided (or training-set) label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub point: DataPoint,
    pub label: ClassId,
}

impl LabeledPoint {
    pub fn new(point: DataPoint, label: ClassId) -> Self {
        Self { point, label }
    }
}

/// The latest `w` unlabeled points, oldest first. Pushes must arrive in
/// strictly increasing index order; once `w` points have been pushed the
/// window stays full and each push evicts exactly the oldest point.
#[derive(Debug, Clone)]
pub struct SlidingWindow {
    capacity: usize,
    buf: VecDeque<DataPoint>,
}

impl SlidingWindow {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "window capacity must be positive");
        Self {
            capacity,
            buf: VecDeque::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.buf.len() == self.capacity
    }

    pub fn oldest_index(&self) -> Option<u64> {
        self.buf.front().map(DataPoint::index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DataPoint> {
        self.buf.iter()
    }

    pub fn get(&self, i: usize) -> Option<&DataPoint> {
        self.buf.get(i)
    }

    /// Borrow every buffered feature vector, oldest first.
    pub fn feature_rows(&self) -> Vec<&[f64]> {
        self.buf.iter().map(DataPoint::features).collect()
    }

    /// Append `x`, returning the evicted point when the window was full.
    pub fn push(&mut self, x: DataPoint) -> Result<Option<DataPoint>, StreamError> {
        if let Some(last) = self.buf.back() {
            if x.index() <= last.index() {
                return Err(StreamError::NonMonotonicIndex {
                    last: last.index(),
                    got: x.index(),
                });
            }
        }
        self.buf.push_back(x);
        Ok(if self.buf.len() > self.capacity {
            self.buf.pop_front()
        } else {
            None
        })
    }
}

/// Fixed-capacity FIFO queue of the newest expert-labeled points.
/// Insertion silently evicts the oldest entries past capacity.
#[derive(Debug, Clone)]
pub struct LabelMemory {
    capacity: usize,
    queue: VecDeque<LabeledPoint>,
}

impl LabelMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "memory capacity must be positive");
        Self {
            capacity,
            queue: VecDeque::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LabeledPoint> {
        self.queue.iter()
    }

    pub fn contains_index(&self, index: u64) -> bool {
        self.queue.iter().any(|lp| lp.point.index() == index)
    }

    /// Append points in arrival order, then evict from the front until the
    /// queue fits. Points whose index is already present are skipped so a
    /// point appears at most once.
    pub fn insert<I>(&mut self, pts: I)
    where
        I: IntoIterator<Item = LabeledPoint>,
    {
        for lp in pts {
            if self.contains_index(lp.point.index()) {
                continue;
            }
            self.queue.push_back(lp);
        }
        while self.queue.len() > self.capacity {
            self.queue.pop_front();
        }
    }
}
