//! Trainable classifiers used as both the online model and the inspector.
//!
//! Variants sit behind the [`Model`] interface so the pipeline never depends
//! on a concrete architecture; [`ModelFactory`] instances are registered by
//! name ("decision_tree", "random_forest") and selected via config or CLI.

mod forest;
mod tree;

pub use tree::TreeNode;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stream::{ClassId, LabeledPoint};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("input has {got} features, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("training data is empty")]
    EmptyData,
    #[error("training row {row} has {got} features, expected {expected}")]
    InconsistentDimensions {
        expected: usize,
        got: usize,
        row: usize,
    },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("unknown model '{name}' (known: decision_tree, random_forest)")]
    UnknownModel { name: String },
    #[error("model deserialization failed: {0}")]
    Load(String),
}

/// Prediction interface the pipeline depends on. Fitted models are
/// immutable and shareable.
pub trait Model: Send + Sync {
    fn predict(&self, features: &[f64]) -> Result<ClassId, ModelError>;
    fn n_features(&self) -> usize;
    fn n_classes(&self) -> usize;
}

/// Training interface: anything that can turn labeled points into a model.
pub trait ModelFactory: Send + Sync {
    fn train(&self, data: &[LabeledPoint]) -> Result<Box<dyn Model>, TrainError>;
    fn name(&self) -> &'static str;
}

/// How many features each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureRule {
    /// ceil(sqrt(d)) features, the forest default.
    Sqrt,
    /// Every feature, the plain-tree default.
    All,
    Fixed(usize),
}

impl FeatureRule {
    fn count(&self, dim: usize) -> usize {
        match self {
            FeatureRule::Sqrt => (dim as f64).sqrt().ceil() as usize,
            FeatureRule::All => dim,
            FeatureRule::Fixed(k) => (*k).clamp(1, dim),
        }
        .max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: FeatureRule,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            features_per_split: FeatureRule::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<(), TrainError> {
        if self.n_trees < 1 {
            return Err(TrainError::InvalidConfig("n_trees must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(TrainError::InvalidConfig(
                "min_samples_split must be >= 2".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassifierKind {
    DecisionTree,
    RandomForest,
}

/// A fitted CART tree or bagged forest. Prediction is a majority vote over
/// trees with ties broken toward the smaller class id, so results are
/// reproducible bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub kind: ClassifierKind,
    trees: Vec<TreeNode>,
    n_classes: usize,
    n_features: usize,
    seed: u64,
}

impl ClassifierModel {
    pub fn trees(&self) -> &[TreeNode] {
        &self.trees
    }

    /// Serialize the fitted model (tree structure, thresholds, leaf counts)
    /// for experiment resumption.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, TrainError> {
        let model: ClassifierModel =
            serde_json::from_str(text).map_err(|e| TrainError::Load(e.to_string()))?;
        if model.trees.is_empty() {
            return Err(TrainError::Load("model has no trees".into()));
        }
        Ok(model)
    }
}

impl Model for ClassifierModel {
    fn predict(&self, features: &[f64]) -> Result<ClassId, ModelError> {
        if features.len() != self.n_features {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_features,
                got: features.len(),
            });
        }
        let mut votes = vec![0usize; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict(features) as usize] += 1;
        }
        let best = votes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(c, _)| c)
            .unwrap_or(0);
        Ok(best as ClassId)
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }
}

fn check_shape(data: &[LabeledPoint]) -> Result<(usize, usize), TrainError> {
    let first = data.first().ok_or(TrainError::EmptyData)?;
    let dim = first.point.dim();
    for (row, lp) in data.iter().enumerate() {
        if lp.point.dim() != dim {
            return Err(TrainError::InconsistentDimensions {
                expected: dim,
                got: lp.point.dim(),
                row,
            });
        }
    }
    let n_classes = data.iter().map(|lp| lp.label as usize).max().unwrap_or(0) + 1;
    Ok((dim, n_classes))
}

/// Train a bagged random forest. Deterministic given `(data, cfg.seed)`;
/// single-class data yields a constant classifier.
pub fn train(data: &[LabeledPoint], cfg: &TrainConfig) -> Result<ClassifierModel, TrainError> {
    cfg.validate()?;
    let (dim, n_classes) = check_shape(data)?;
    let trees = forest::fit_forest(data, dim, n_classes, cfg);
    Ok(ClassifierModel {
        kind: ClassifierKind::RandomForest,
        trees,
        n_classes,
        n_features: dim,
        seed: cfg.seed,
    })
}

/// Train a single CART tree: no bootstrap, every feature at every split.
pub fn train_tree(data: &[LabeledPoint], cfg: &TrainConfig) -> Result<ClassifierModel, TrainError> {
    cfg.validate()?;
    let (dim, n_classes) = check_shape(data)?;
    let tree_cfg = TrainConfig {
        n_trees: 1,
        bootstrap: false,
        features_per_split: FeatureRule::All,
        ..cfg.clone()
    };
    let trees = forest::fit_forest(data, dim, n_classes, &tree_cfg);
    Ok(ClassifierModel {
        kind: ClassifierKind::DecisionTree,
        trees,
        n_classes,
        n_features: dim,
        seed: cfg.seed,
    })
}

/// 0 when the two predictions agree, 1 otherwise. This is the bit the
/// change detector monitors.
pub fn disagreement(y_online: ClassId, y_insp: ClassId) -> u8 {
    u8::from(y_online != y_insp)
}

/// Named factory so configs and the CLI can pick an architecture at runtime.
#[derive(Debug, Clone)]
pub struct ClassifierFactory {
    kind: ClassifierKind,
    cfg: TrainConfig,
}

impl ClassifierFactory {
    pub fn new(kind: ClassifierKind, cfg: TrainConfig) -> Self {
        Self { kind, cfg }
    }

    pub fn by_name(name: &str, cfg: TrainConfig) -> Result<Self, TrainError> {
        match name {
            "decision_tree" => Ok(Self::new(ClassifierKind::DecisionTree, cfg)),
            "random_forest" => Ok(Self::new(ClassifierKind::RandomForest, cfg)),
            other => Err(TrainError::UnknownModel {
                name: other.to_string(),
            }),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            kind: self.kind,
            cfg: self.cfg.clone().with_seed(seed),
        }
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }
}

impl ModelFactory for ClassifierFactory {
    fn train(&self, data: &[LabeledPoint]) -> Result<Box<dyn Model>, TrainError> {
        let model = match self.kind {
            ClassifierKind::DecisionTree => train_tree(data, &self.cfg)?,
            ClassifierKind::RandomForest => train(data, &self.cfg)?,
        };
        Ok(Box::new(model))
    }

    fn name(&self) -> &'static str {
        match self.kind {
            ClassifierKind::DecisionTree => "decision_tree",
            ClassifierKind::RandomForest => "random_forest",
        }
    }
}
