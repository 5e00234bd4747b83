//! CART fitting: Gini impurity, threshold splits at midpoints between
//! sorted distinct feature values.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::stream::{ClassId, LabeledPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    /// Class distribution of the training samples that reached this leaf;
    /// the counts always sum to the leaf's sample count.
    Leaf { counts: Vec<u32> },
}

impl TreeNode {
    pub fn predict(&self, features: &[f64]) -> ClassId {
        match self {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if features[*feature] <= *threshold {
                    left.predict(features)
                } else {
                    right.predict(features)
                }
            }
            TreeNode::Leaf { counts } => argmax_class(counts),
        }
    }
}

/// Ties break toward the smaller class id.
fn argmax_class(counts: &[u32]) -> ClassId {
    let mut best = 0usize;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best as ClassId
}

fn gini_from_counts(counts: &[u32], total: u32) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = f64::from(total);
    1.0 - counts
        .iter()
        .map(|&c| (f64::from(c) / t).powi(2))
        .sum::<f64>()
}

pub(super) struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: usize,
}

pub(super) fn fit_tree(
    data: &[LabeledPoint],
    ids: Vec<usize>,
    dim: usize,
    n_classes: usize,
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    grow(data, ids, dim, n_classes, params, rng, 0)
}

fn class_counts(data: &[LabeledPoint], ids: &[usize], n_classes: usize) -> Vec<u32> {
    let mut counts = vec![0u32; n_classes];
    for &i in ids {
        counts[data[i].label as usize] += 1;
    }
    counts
}

fn grow(
    data: &[LabeledPoint],
    ids: Vec<usize>,
    dim: usize,
    n_classes: usize,
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
    depth: usize,
) -> TreeNode {
    let counts = class_counts(data, &ids, n_classes);
    let n = ids.len() as u32;
    let parent_gini = gini_from_counts(&counts, n);
    let depth_exhausted = params.max_depth.is_some_and(|d| depth >= d);
    if parent_gini == 0.0 || ids.len() < params.min_samples_split || depth_exhausted {
        return TreeNode::Leaf { counts };
    }

    let features = pick_features(dim, params.features_per_split, rng);
    let Some((feature, threshold, gain)) =
        best_split(data, &ids, &features, &counts, parent_gini, n_classes)
    else {
        return TreeNode::Leaf { counts };
    };
    debug_assert!(gain >= 0.0, "accepted split must not lose purity: {gain}");

    let (left_ids, right_ids): (Vec<usize>, Vec<usize>) = ids
        .into_iter()
        .partition(|&i| data[i].point.features()[feature] <= threshold);
    debug_assert!(!left_ids.is_empty() && !right_ids.is_empty());

    let left = grow(data, left_ids, dim, n_classes, params, rng, depth + 1);
    let right = grow(data, right_ids, dim, n_classes, params, rng, depth + 1);
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Random feature subset, in ascending order so the split search stays
/// deterministic for a given RNG state.
fn pick_features(dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if k >= dim {
        return (0..dim).collect();
    }
    let mut all: Vec<usize> = (0..dim).collect();
    all.shuffle(rng);
    let mut chosen: Vec<usize> = all.into_iter().take(k).collect();
    chosen.sort_unstable();
    chosen
}

/// Scan every candidate midpoint of every candidate feature and keep the
/// first split with the strictly largest Gini gain.
fn best_split(
    data: &[LabeledPoint],
    ids: &[usize],
    features: &[usize],
    parent_counts: &[u32],
    parent_gini: f64,
    n_classes: usize,
) -> Option<(usize, f64, f64)> {
    let n = ids.len() as f64;
    let mut best: Option<(usize, f64, f64)> = None;
    let mut order: Vec<usize> = Vec::with_capacity(ids.len());

    for &feature in features {
        order.clear();
        order.extend_from_slice(ids);
        order.sort_unstable_by(|&a, &b| {
            data[a].point.features()[feature]
                .partial_cmp(&data[b].point.features()[feature])
                .expect("features are finite")
        });

        let mut left_counts = vec![0u32; n_classes];
        let mut left_n = 0u32;
        for w in 0..order.len() - 1 {
            let i = order[w];
            left_counts[data[i].label as usize] += 1;
            left_n += 1;
            let v = data[i].point.features()[feature];
            let v_next = data[order[w + 1]].point.features()[feature];
            if v == v_next {
                continue;
            }
            let right_n = ids.len() as u32 - left_n;
            let mut right_counts = vec![0u32; n_classes];
            for c in 0..n_classes {
                right_counts[c] = parent_counts[c] - left_counts[c];
            }
            let weighted = (f64::from(left_n) / n) * gini_from_counts(&left_counts, left_n)
                + (f64::from(right_n) / n) * gini_from_counts(&right_counts, right_n);
            let gain = parent_gini - weighted;
            if gain > best.map_or(1e-12, |(_, _, g)| g) {
                best = Some((feature, (v + v_next) / 2.0, gain));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::DataPoint;
    use rand::SeedableRng;

    fn lp(i: u64, features: Vec<f64>, label: ClassId) -> LabeledPoint {
        LabeledPoint::new(DataPoint::new(i, features), label)
    }

    #[test]
    fn one_dimensional_threshold_is_a_midpoint() {
        let data = vec![
            lp(0, vec![1.0], 0),
            lp(1, vec![2.0], 0),
            lp(2, vec![5.0], 1),
            lp(3, vec![6.0], 1),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = TreeParams {
            max_depth: None,
            min_samples_split: 2,
            features_per_split: 1,
        };
        let tree = fit_tree(&data, vec![0, 1, 2, 3], 1, 2, &params, &mut rng);
        match &tree {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 3.5),
            TreeNode::Leaf { .. } => panic!("separable data must split"),
        }
        assert_eq!(tree.predict(&[0.0]), 0);
        assert_eq!(tree.predict(&[9.0]), 1);
    }

    #[test]
    fn pure_node_becomes_leaf_with_full_counts() {
        let data = vec![lp(0, vec![1.0], 1), lp(1, vec![2.0], 1)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = TreeParams {
            max_depth: None,
            min_samples_split: 2,
            features_per_split: 1,
        };
        let tree = fit_tree(&data, vec![0, 1], 1, 2, &params, &mut rng);
        assert_eq!(
            tree,
            TreeNode::Leaf {
                counts: vec![0, 2]
            }
        );
    }

    #[test]
    fn leaf_counts_sum_to_samples_everywhere() {
        fn check(node: &TreeNode) -> u32 {
            match node {
                TreeNode::Leaf { counts } => counts.iter().sum(),
                TreeNode::Split { left, right, .. } => check(left) + check(right),
            }
        }
        let data: Vec<LabeledPoint> = (0..50)
            .map(|i| lp(i, vec![(i % 13) as f64, (i % 7) as f64], (i % 2) as u32))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = TreeParams {
            max_depth: Some(4),
            min_samples_split: 2,
            features_per_split: 2,
        };
        let tree = fit_tree(&data, (0..50).collect(), 2, 2, &params, &mut rng);
        assert_eq!(check(&tree), 50);
    }
}
