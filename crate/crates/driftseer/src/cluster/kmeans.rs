//! Lloyd's algorithm with seeded initialization and empty-cluster repair.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{euclidean, ClusterError, ClusterMethod, Clustering};

const MAX_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansOutcome {
    pub clustering: Clustering,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances after each assignment pass.
    pub objective_trace: Vec<f64>,
}

/// Cluster `points` into `k` groups, iterating from `k` seeded-random
/// distinct initial centroids until the assignment fixpoint or 300
/// iterations. An emptied cluster is reseeded to the point farthest from
/// its assigned centroid.
pub fn kmeans(points: &[&[f64]], k: usize, seed: u64) -> Result<KmeansOutcome, ClusterError> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(ClusterError::InvalidK { k, points: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = initial_centroids(points, k, &mut rng);

    let mut assignments = vec![0usize; n];
    let mut trace = Vec::new();
    for _ in 0..MAX_ITERS {
        let mut changed = false;
        let mut objective = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (best, d) = nearest(p, &centroids);
            objective += d * d;
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
        }
        trace.push(objective);
        if !changed && trace.len() > 1 {
            break;
        }

        // Mean update, then repair any emptied cluster by moving its
        // centroid onto the point farthest from its assigned centroid.
        let dim = points[0].len();
        let mut sums = vec![vec![0.0f64; dim]; k];
        let mut sizes = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            sizes[assignments[i]] += 1;
            for (s, v) in sums[assignments[i]].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        for c in 0..k {
            if sizes[c] > 0 {
                for s in sums[c].iter_mut() {
                    *s /= sizes[c] as f64;
                }
                centroids[c] = sums[c].clone();
            } else if let Some(far) = farthest_point(points, &assignments, &sizes, &centroids) {
                centroids[c] = points[far].to_vec();
                sizes[assignments[far]] -= 1;
                sizes[c] += 1;
                assignments[far] = c;
            }
        }
    }

    // Relabel to dense ids over non-empty clusters.
    let mut remap = vec![usize::MAX; k];
    let mut next = 0usize;
    for &a in &assignments {
        if remap[a] == usize::MAX {
            remap[a] = next;
            next += 1;
        }
    }
    let dense: Vec<Option<usize>> = assignments.iter().map(|&a| Some(remap[a])).collect();
    let mut dense_centroids = vec![Vec::new(); next];
    for (c, m) in remap.iter().enumerate() {
        if *m != usize::MAX {
            dense_centroids[*m] = centroids[c].clone();
        }
    }
    Ok(KmeansOutcome {
        clustering: Clustering {
            assignments: dense,
            n_clusters: next,
            method: ClusterMethod::Kmeans,
        },
        centroids: dense_centroids,
        objective_trace: trace,
    })
}

/// Pick `k` initial centroids, preferring distinct feature vectors so that
/// `k == number of distinct points` degenerates into one point per cluster.
fn initial_centroids(points: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut unique_ids: Vec<usize> = Vec::new();
    let mut seen: Vec<&[f64]> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if !seen.iter().any(|q| q == p) {
            seen.push(p);
            unique_ids.push(i);
        }
    }
    unique_ids.shuffle(rng);
    let mut chosen: Vec<Vec<f64>> = unique_ids
        .iter()
        .take(k)
        .map(|&i| points[i].to_vec())
        .collect();
    let mut fill = 0usize;
    while chosen.len() < k {
        chosen.push(points[fill % points.len()].to_vec());
        fill += 1;
    }
    chosen
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = euclidean(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Candidate for reseeding: the point with the largest distance to its own
/// centroid, excluding points that are alone in their cluster.
fn farthest_point(
    points: &[&[f64]],
    assignments: &[usize],
    sizes: &[usize],
    centroids: &[Vec<f64>],
) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, p) in points.iter().enumerate() {
        if sizes[assignments[i]] <= 1 {
            continue;
        }
        let d = euclidean(p, &centroids[assignments[i]]);
        if best.is_none_or(|(bd, _)| d > bd) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i)
}
