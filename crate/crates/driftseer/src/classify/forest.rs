//! Bagging on top of the CART fitter. Each tree draws its own RNG from the
//! config seed and the tree position, so training is reproducible no matter
//! how trees might be scheduled.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{fit_tree, TreeNode, TreeParams};
use super::TrainConfig;
use crate::stream::LabeledPoint;

pub(super) fn fit_forest(
    data: &[LabeledPoint],
    dim: usize,
    n_classes: usize,
    cfg: &TrainConfig,
) -> Vec<TreeNode> {
    let params = TreeParams {
        max_depth: cfg.max_depth,
        min_samples_split: cfg.min_samples_split,
        features_per_split: cfg.features_per_split.count(dim),
    };
    (0..cfg.n_trees)
        .map(|t| {
            let mut rng = tree_rng(cfg.seed, t);
            let ids = if cfg.bootstrap {
                bootstrap_ids(data.len(), &mut rng)
            } else {
                (0..data.len()).collect()
            };
            fit_tree(data, ids, dim, n_classes, &params, &mut rng)
        })
        .collect()
}

fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    // Distinct, stable stream per tree.
    ChaCha8Rng::seed_from_u64(seed ^ (tree as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn bootstrap_ids(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bootstrap_is_seed_deterministic() {
        let mut a = tree_rng(7, 3);
        let mut b = tree_rng(7, 3);
        assert_eq!(bootstrap_ids(100, &mut a), bootstrap_ids(100, &mut b));
        let mut c = tree_rng(7, 4);
        assert_ne!(bootstrap_ids(100, &mut a), bootstrap_ids(100, &mut c));
    }
}
