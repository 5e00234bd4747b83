//! Window clustering for stratified label sampling: epsilon estimation by
//! knee detection, DBSCAN with a K-means fallback, and per-stratum sampling
//! of labeling candidates.

mod dbscan;
mod kmeans;

pub use dbscan::dbscan;
pub use kmeans::{kmeans, KmeansOutcome};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::stream::{DataPoint, SlidingWindow};

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("k = {k} exceeds the number of points ({points})")]
    InvalidK { k: usize, points: usize },
    #[error("all nearest-neighbor distances are zero; epsilon is undefined")]
    DegenerateDistances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClusterMethod {
    Dbscan,
    Kmeans,
}

/// Assignment of window points to strata. `None` marks DBSCAN noise;
/// cluster ids are dense in `0..n_clusters` and K-means never emits noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub assignments: Vec<Option<usize>>,
    pub n_clusters: usize,
    pub method: ClusterMethod,
}

impl Clustering {
    pub fn noise_count(&self) -> usize {
        self.assignments.iter().filter(|a| a.is_none()).count()
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, a)| (*a == Some(cluster)).then_some(i))
            .collect()
    }
}

/// Epsilon for DBSCAN, read off the sorted nearest-neighbor-distance curve.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonEstimate {
    pub epsilon: f64,
    /// Ascending nearest-neighbor distances the estimate was read from.
    pub curve: Vec<f64>,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Estimate DBSCAN's epsilon from a point set: sort every point's
/// nearest-neighbor distance ascending and take the value at the knee, i.e.
/// the index with the largest perpendicular distance to the chord from the
/// first to the last curve point. A constant curve returns that constant.
pub fn estimate_epsilon(points: &[&[f64]]) -> Result<EpsilonEstimate, ClusterError> {
    if points.len() < 2 {
        return Err(ClusterError::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let mut curve: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| euclidean(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    curve.sort_unstable_by(|a, b| a.partial_cmp(b).expect("distances are finite"));

    let knee = knee_index(&curve);
    let mut epsilon = curve[knee];
    if epsilon == 0.0 {
        // A zero radius cannot separate density levels; move up to the first
        // positive value on the curve.
        epsilon = *curve
            .iter()
            .find(|d| **d > 0.0)
            .ok_or(ClusterError::DegenerateDistances)?;
    }
    Ok(EpsilonEstimate { epsilon, curve })
}

/// Index of the point on `(i, curve[i])` farthest (perpendicular) from the
/// chord between the first and last curve points; 0 for a constant curve.
fn knee_index(curve: &[f64]) -> usize {
    let n = curve.len();
    let (x0, y0) = (0.0, curve[0]);
    let (x1, y1) = ((n - 1) as f64, curve[n - 1]);
    if y0 == y1 {
        return 0;
    }
    let (dx, dy) = (x1 - x0, y1 - y0);
    let norm = (dx * dx + dy * dy).sqrt();
    let mut best = (0usize, -1.0f64);
    for (i, &y) in curve.iter().enumerate() {
        let d = (dy * (i as f64 - x0) - dx * (y - y0)).abs() / norm;
        if d > best.1 {
            best = (i, d);
        }
    }
    best.0
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowClusterConfig {
    /// Configured window size `w`; drives `min_pts = max(1, w/100)` and the
    /// fallback `k = max(2, w/100)` so at most ~1% of the stream is sampled.
    pub window_capacity: usize,
    /// Smallest window worth clustering; `None` means `w/2`.
    pub min_window: Option<usize>,
    pub seed: u64,
}

impl WindowClusterConfig {
    pub fn new(window_capacity: usize, seed: u64) -> Self {
        Self {
            window_capacity,
            min_window: None,
            seed,
        }
    }

    fn min_window(&self) -> usize {
        self.min_window.unwrap_or(self.window_capacity / 2).max(2)
    }
}

/// Cluster the window for sampling. DBSCAN runs first; K-means takes over
/// when DBSCAN found no usable density structure (fewer than 2 clusters,
/// more than `w/10` clusters, or more than half the window flagged noise).
/// Returns `None` when the window is still too small to cluster.
pub fn cluster_window(
    window: &SlidingWindow,
    eps: &EpsilonEstimate,
    cfg: &WindowClusterConfig,
) -> Option<Clustering> {
    let rows = window.feature_rows();
    if rows.len() < cfg.min_window() {
        return None;
    }
    let w = cfg.window_capacity;
    let min_pts = (w / 100).max(1);
    let by_density = dbscan(&rows, eps.epsilon, min_pts);
    let noise_frac = by_density.noise_count() as f64 / rows.len() as f64;
    let fallback =
        by_density.n_clusters < 2 || by_density.n_clusters > w / 10 || noise_frac > 0.5;
    if !fallback {
        return Some(by_density);
    }
    let k = (w / 100).max(2).min(rows.len());
    let outcome = kmeans(&rows, k, cfg.seed).expect("k <= rows.len() by construction");
    Some(outcome.clustering)
}

/// Uniformly sample up to `per_stratum` points from every non-noise stratum.
/// Deterministic under `seed`; never returns noise points or duplicates.
pub fn stratified_sample(
    clustering: &Clustering,
    window: &SlidingWindow,
    per_stratum: usize,
    seed: u64,
) -> Vec<DataPoint> {
    assert!(per_stratum >= 1, "per_stratum must be >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::new();
    for cluster in 0..clustering.n_clusters {
        let members = clustering.members(cluster);
        let take = per_stratum.min(members.len());
        let mut chosen: Vec<usize> = members.sample(&mut rng, take).copied().collect();
        chosen.sort_unstable();
        for i in chosen {
            if let Some(p) = window.get(i) {
                picked.push(p.clone());
            }
        }
    }
    picked
}
