//! Density-based clustering with Euclidean distances.
//!
//! Core points have at least `min_pts` neighbors within `epsilon`
//! (inclusive, counting the point itself). Clusters are the connected
//! components of core points under that neighbor relation, numbered in
//! ascending order of each component's smallest core index. A non-core
//! point within `epsilon` of a core joins its nearest core's cluster (ties
//! toward the smaller core index); everything else is noise. These rules
//! make the result fully deterministic for a fixed point order, which is
//! what lets the test suite compare against an independent brute-force
//! oracle exactly.

use super::{euclidean, ClusterMethod, Clustering};

pub fn dbscan(points: &[&[f64]], epsilon: f64, min_pts: usize) -> Clustering {
    assert!(epsilon >= 0.0, "epsilon must be non-negative");
    assert!(min_pts >= 1, "min_pts must be >= 1");
    let n = points.len();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if euclidean(points[i], points[j]) <= epsilon {
                neighbors[i].push(j);
            }
        }
    }
    let core: Vec<bool> = neighbors.iter().map(|ns| ns.len() >= min_pts).collect();

    let mut assignments: Vec<Option<usize>> = vec![None; n];
    let mut n_clusters = 0usize;
    let mut queue = Vec::new();
    for start in 0..n {
        if !core[start] || assignments[start].is_some() {
            continue;
        }
        let cluster = n_clusters;
        n_clusters += 1;
        assignments[start] = Some(cluster);
        queue.push(start);
        while let Some(i) = queue.pop() {
            for &j in &neighbors[i] {
                if core[j] && assignments[j].is_none() {
                    assignments[j] = Some(cluster);
                    queue.push(j);
                }
            }
        }
    }

    // Border points: nearest core decides, smaller core index on ties.
    for i in 0..n {
        if core[i] {
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for &j in &neighbors[i] {
            if !core[j] {
                continue;
            }
            let d = euclidean(points[i], points[j]);
            let candidate = (d, j);
            if best.is_none_or(|b| candidate < b) {
                best = Some(candidate);
            }
        }
        if let Some((_, j)) = best {
            assignments[i] = assignments[j];
        }
    }

    Clustering {
        assignments,
        n_clusters,
        method: ClusterMethod::Dbscan,
    }
}
