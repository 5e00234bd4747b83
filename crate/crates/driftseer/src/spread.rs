//! Graph-based label spreading from the few true labels in memory `M` to
//! every point of window `W`, producing the inspector's training set.
//!
//! A symmetric similarity graph is built over `M ∪ W` (k-nearest-neighbor
//! by default; the complete graph is available behind a config switch for
//! fidelity experiments). Labeled rows start one-hot, unlabeled rows zero,
//! and the normalized diffusion `F ← α·S·F + (1−α)·Y` runs until the
//! largest row change drops below the tolerance or the iteration cap hits.
//! Each window point takes the argmax of its final row, ties toward the
//! smaller class id; a point no diffusion reached falls back to its nearest
//! labeled point so that a single-class memory always spreads its class
//! everywhere.

use serde::Serialize;
use thiserror::Error;

use crate::cluster::euclidean;
use crate::stream::{ClassId, LabelMemory, LabeledPoint, SlidingWindow};

#[derive(Debug, Error, PartialEq)]
pub enum SpreadError {
    #[error("cannot spread labels from an empty memory")]
    EmptyMemory,
    #[error("memory and window dimensionality differ: {memory} vs {window}")]
    DimensionMismatch { memory: usize, window: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GraphMode {
    /// Symmetric k-nearest-neighbor graph.
    Knn(usize),
    /// Complete weighted graph over all points.
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadConfig {
    pub graph: GraphMode,
    /// Clamping factor in (0, 1): how much diffusion outweighs the anchor
    /// labels on every iteration.
    pub alpha: f64,
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for SpreadConfig {
    fn default() -> Self {
        Self {
            graph: GraphMode::Knn(7),
            alpha: 0.2,
            max_iter: 30,
            tolerance: 1e-3,
        }
    }
}

impl SpreadConfig {
    fn validate(&self) {
        if let GraphMode::Knn(k) = self.graph {
            assert!(k >= 1, "knn graph needs k >= 1");
        }
        assert!(
            self.alpha > 0.0 && self.alpha < 1.0,
            "alpha must be in (0, 1)"
        );
    }
}

#[derive(Debug, Clone)]
pub struct SpreadResult {
    /// One label per window point, oldest first.
    pub labels: Vec<ClassId>,
    /// Final label-distribution row per window point, normalized.
    pub confidence: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

impl SpreadResult {
    /// Pair the spread labels back with the window points, in order.
    pub fn training_set(&self, window: &SlidingWindow) -> Vec<LabeledPoint> {
        window
            .iter()
            .zip(self.labels.iter())
            .map(|(p, &label)| LabeledPoint::new(p.clone(), label))
            .collect()
    }
}

pub fn spread_labels(
    memory: &LabelMemory,
    window: &SlidingWindow,
    cfg: &SpreadConfig,
) -> Result<SpreadResult, SpreadError> {
    cfg.validate();
    if memory.is_empty() {
        return Err(SpreadError::EmptyMemory);
    }
    let mem: Vec<&LabeledPoint> = memory.iter().collect();
    let dim = mem[0].point.dim();
    if let Some(p) = window.iter().next() {
        if p.dim() != dim {
            return Err(SpreadError::DimensionMismatch {
                memory: dim,
                window: p.dim(),
            });
        }
    }

    let mut rows: Vec<&[f64]> = mem.iter().map(|lp| lp.point.features()).collect();
    rows.extend(window.iter().map(|p| p.features()));
    let n = rows.len();
    let m = mem.len();
    let n_classes = mem.iter().map(|lp| lp.label as usize).max().unwrap_or(0) + 1;

    let edges = build_edges(&rows, cfg.graph);

    // Symmetric normalization S = D^-1/2 W D^-1/2.
    let mut degree = vec![0.0f64; n];
    for &(i, j, w) in &edges {
        degree[i] += w;
        degree[j] += w;
    }
    let inv_sqrt: Vec<f64> = degree
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();

    let mut anchor = vec![vec![0.0f64; n_classes]; n];
    for (i, lp) in mem.iter().enumerate() {
        anchor[i][lp.label as usize] = 1.0;
    }
    let mut f = anchor.clone();
    let mut next = vec![vec![0.0f64; n_classes]; n];

    let mut iterations = 0usize;
    let mut converged = false;
    while iterations < cfg.max_iter {
        for (i, row) in next.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = (1.0 - cfg.alpha) * anchor[i][c];
            }
        }
        for &(i, j, w) in &edges {
            let s = w * inv_sqrt[i] * inv_sqrt[j];
            for c in 0..n_classes {
                next[i][c] += cfg.alpha * s * f[j][c];
                next[j][c] += cfg.alpha * s * f[i][c];
            }
        }
        let mut delta = 0.0f64;
        for i in 0..n {
            for c in 0..n_classes {
                delta = delta.max((next[i][c] - f[i][c]).abs());
            }
        }
        std::mem::swap(&mut f, &mut next);
        iterations += 1;
        if delta < cfg.tolerance {
            converged = true;
            break;
        }
    }

    // Read off the window rows.
    let mut labels = Vec::with_capacity(n - m);
    let mut confidence = Vec::with_capacity(n - m);
    for i in m..n {
        let row = &f[i];
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            labels.push(argmax(row));
            confidence.push(row.iter().map(|v| v / sum).collect());
        } else {
            labels.push(nearest_memory_label(rows[i], &mem));
            confidence.push(vec![1.0 / n_classes as f64; n_classes]);
        }
    }
    Ok(SpreadResult {
        labels,
        confidence,
        iterations,
        converged,
    })
}

/// Undirected weighted edges (i < j). Similarities are
/// `exp(-d² / σ²)` with σ the mean selected-neighbor distance; when every
/// selected distance is zero all weights are 1.
fn build_edges(rows: &[&[f64]], mode: GraphMode) -> Vec<(usize, usize, f64)> {
    let n = rows.len();
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    match mode {
        GraphMode::Complete => {
            for i in 0..n {
                for j in (i + 1)..n {
                    pairs.push((i, j, euclidean(rows[i], rows[j])));
                }
            }
        }
        GraphMode::Knn(k) => {
            let mut seen = std::collections::BTreeSet::new();
            for i in 0..n {
                // Stable selection: by distance, then by index.
                let mut dists: Vec<(f64, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (euclidean(rows[i], rows[j]), j))
                    .collect();
                dists.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
                for &(d, j) in dists.iter().take(k) {
                    let key = (i.min(j), i.max(j));
                    if seen.insert(key) {
                        pairs.push((key.0, key.1, d));
                    }
                }
            }
        }
    }
    let mean: f64 = if pairs.is_empty() {
        0.0
    } else {
        pairs.iter().map(|&(_, _, d)| d).sum::<f64>() / pairs.len() as f64
    };
    pairs
        .into_iter()
        .map(|(i, j, d)| {
            let w = if mean > 0.0 {
                (-d * d / (mean * mean)).exp()
            } else {
                1.0
            };
            (i, j, w)
        })
        .collect()
}

fn argmax(row: &[f64]) -> ClassId {
    let mut best = 0usize;
    for (c, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = c;
        }
    }
    best as ClassId
}

fn nearest_memory_label(features: &[f64], mem: &[&LabeledPoint]) -> ClassId {
    let mut best = (f64::INFINITY, 0u32);
    for lp in mem {
        let d = euclidean(features, lp.point.features());
        if d < best.0 {
            best = (d, lp.label);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::DataPoint;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn memory_of(points: &[(u64, Vec<f64>, ClassId)]) -> LabelMemory {
        let mut m = LabelMemory::new(points.len().max(1));
        m.insert(
            points
                .iter()
                .map(|(i, f, l)| LabeledPoint::new(DataPoint::new(*i, f.clone()), *l)),
        );
        m
    }

    fn window_of(rows: &[Vec<f64>], start: u64) -> SlidingWindow {
        let mut w = SlidingWindow::new(rows.len());
        for (i, r) in rows.iter().enumerate() {
            w.push(DataPoint::new(start + i as u64, r.clone())).unwrap();
        }
        w
    }

    #[test]
    fn disconnected_components_take_their_own_seed_label() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut rows = Vec::new();
        for _ in 0..20 {
            rows.push(vec![
                rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
            ]);
        }
        for _ in 0..20 {
            rows.push(vec![
                500.0 + rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
            ]);
        }
        let window = window_of(&rows, 100);
        let memory = memory_of(&[
            (0, vec![0.0, 0.0], 0),
            (1, vec![500.0, 0.0], 1),
        ]);
        let result = spread_labels(&memory, &window, &SpreadConfig::default()).unwrap();
        for (i, &label) in result.labels.iter().enumerate() {
            let expected = u32::from(i >= 20);
            assert_eq!(label, expected, "window point {i}");
        }
    }

    #[test]
    fn empty_memory_is_an_error() {
        let window = window_of(&[vec![0.0], vec![1.0]], 0);
        let memory = LabelMemory::new(4);
        assert_eq!(
            spread_labels(&memory, &window, &SpreadConfig::default()).unwrap_err(),
            SpreadError::EmptyMemory
        );
    }

    /// Four points on a line, labels at both ends, k = 1. The nearest
    /// neighbors are a<-b, b<-c, c<-d, so the symmetric union is the path
    /// a-b-c-d. The expected labels come from iterating the 4x4 normalized
    /// diffusion by hand until the fixpoint.
    #[test]
    fn path_graph_splits_between_the_seeds() {
        let window = window_of(&[vec![1.0], vec![2.05]], 10);
        let memory = memory_of(&[(0, vec![0.0], 0), (1, vec![3.2], 1)]);
        let cfg = SpreadConfig {
            graph: GraphMode::Knn(1),
            alpha: 0.2,
            max_iter: 200,
            tolerance: 1e-10,
        };
        let result = spread_labels(&memory, &window, &cfg).unwrap();
        assert_eq!(result.labels, vec![0, 1]);

        // Brute-force oracle: explicit dense iteration over the same path
        // graph (nodes a=0, d=1 labeled; b, c unlabeled; unit weights).
        let s = [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 1.0],
            [0.0, 1.0, 1.0, 0.0],
        ];
        let deg = [1.0f64, 1.0, 2.0, 2.0];
        let y = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]];
        let mut f = y;
        for _ in 0..10_000 {
            let mut next = [[0.0f64; 2]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    let norm = s[i][j] / (deg[i].sqrt() * deg[j].sqrt());
                    for c in 0..2 {
                        next[i][c] += 0.2 * norm * f[j][c];
                    }
                }
                for c in 0..2 {
                    next[i][c] += 0.8 * y[i][c];
                }
            }
            f = next;
        }
        // b (node 2) leans to class 0, c (node 3) to class 1.
        assert!(f[2][0] > f[2][1]);
        assert!(f[3][1] > f[3][0]);
    }

    #[test]
    fn uniform_memory_labels_spread_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let window = window_of(&rows, 10);
        // All memory points carry class 1, including one far-away outlier
        // cluster the graph may not reach.
        let memory = memory_of(&[
            (0, vec![0.5, 0.5], 1),
            (1, vec![900.0, 900.0], 1),
        ]);
        let result = spread_labels(&memory, &window, &SpreadConfig::default()).unwrap();
        assert!(result.labels.iter().all(|&l| l == 1));
    }

    #[test]
    fn confidence_rows_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let window = window_of(&rows, 50);
        let memory = memory_of(&[
            (0, vec![0.2, 0.2], 0),
            (1, vec![0.8, 0.8], 1),
        ]);
        let result = spread_labels(&memory, &window, &SpreadConfig::default()).unwrap();
        assert_eq!(result.labels.len(), 40);
        for row in &result.confidence {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&v| v >= 0.0));
        }
        assert!(result.iterations <= SpreadConfig::default().max_iter);
    }

    #[test]
    fn window_order_permutation_permutes_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let memory = memory_of(&[
            (0, vec![0.1, 0.1], 0),
            (1, vec![0.9, 0.9], 1),
            (2, vec![0.5, 0.1], 0),
        ]);
        let forward = window_of(&rows, 100);
        let mut shuffled_rows = rows.clone();
        shuffled_rows.reverse();
        let reversed = window_of(&shuffled_rows, 100);
        let cfg = SpreadConfig::default();
        let a = spread_labels(&memory, &forward, &cfg).unwrap();
        let b = spread_labels(&memory, &reversed, &cfg).unwrap();
        let mut b_labels = b.labels.clone();
        b_labels.reverse();
        assert_eq!(a.labels, b_labels);
    }

    #[test]
    fn complete_graph_mode_agrees_on_separated_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut rows = Vec::new();
        for _ in 0..10 {
            rows.push(vec![rng.random_range(-0.1..0.1)]);
        }
        for _ in 0..10 {
            rows.push(vec![50.0 + rng.random_range(-0.1..0.1)]);
        }
        let window = window_of(&rows, 10);
        let memory = memory_of(&[(0, vec![0.0], 0), (1, vec![50.0], 1)]);
        let cfg = SpreadConfig {
            graph: GraphMode::Complete,
            ..SpreadConfig::default()
        };
        let result = spread_labels(&memory, &window, &cfg).unwrap();
        for (i, &label) in result.labels.iter().enumerate() {
            assert_eq!(label, u32::from(i >= 10));
        }
    }
}
