//! The drift-monitoring orchestrator.
//!
//! Per point: the online and inspector models both predict, the
//! disagreement bit feeds the change detector, and the window slides. Every
//! sampling period (once the window is full) the window is clustered and a
//! stratified sample of candidates goes out as an asynchronous label
//! request; the stream keeps flowing while a request is open. When answers
//! arrive they enter the label memory, memory labels spread across the
//! window, and the inspector retrains on the spread labels. The online
//! model itself is only replaced from outside (the experiment runner
//! retrains it on oracle-labeled history when an alarm fires and the config
//! asks for that), which keeps this type free of ground-truth access.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::classify::{disagreement, ClassifierFactory, Model, ModelFactory, TrainError};
use crate::cluster::{
    cluster_window, estimate_epsilon, stratified_sample, ClusterError, EpsilonEstimate,
    WindowClusterConfig,
};
use crate::detect::{Alarm, ChangeDetector, DetectorConfig, DetectorError};
use crate::spread::{spread_labels, SpreadConfig, SpreadError};
use crate::stream::{ClassId, DataPoint, LabelMemory, LabeledPoint, SlidingWindow, StreamError};

#[derive(Debug, Error)]
pub enum SeerError {
    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("online and inspector models expect different dimensionalities: {online} vs {inspector}")]
    ModelDimensionMismatch { online: usize, inspector: usize },
    #[error("point has {got} features, pipeline expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown label request id {id}")]
    UnknownRequest { id: u64 },
    #[error("answer contains index {index} that request {id} never asked for")]
    AnswerNotRequested { id: u64, index: u64 },
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Spread(#[from] SpreadError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error("prediction failed: {0}")]
    Model(#[from] crate::classify::ModelError),
}

/// Pipeline parameters. `sampling_period` of `None` means "every window
/// length", matching the batched labeling cadence the label counts imply.
#[derive(Debug, Clone, Serialize)]
pub struct SeerConfig {
    pub window: usize,
    pub memory: usize,
    pub detector: DetectorConfig,
    pub sampling_period: Option<usize>,
    pub per_stratum: usize,
    /// Upper bound on the fraction of stream points the oracle may label.
    pub budget_fraction: f64,
    pub retrain_online_on_alarm: bool,
    /// Re-estimate DBSCAN's epsilon from each window instead of reusing the
    /// training-time estimate.
    pub reestimate_epsilon: bool,
    pub spread: SpreadConfig,
    pub seed: u64,
}

impl Default for SeerConfig {
    fn default() -> Self {
        Self {
            window: 1_000,
            memory: 15,
            detector: DetectorConfig::default(),
            sampling_period: None,
            per_stratum: 1,
            budget_fraction: 0.01,
            retrain_online_on_alarm: true,
            reestimate_epsilon: false,
            spread: SpreadConfig::default(),
            seed: 0,
        }
    }
}

impl SeerConfig {
    pub fn sampling_period(&self) -> usize {
        self.sampling_period.unwrap_or(self.window).max(1)
    }

    pub fn validate(&self) -> Result<(), SeerError> {
        let mut problems = Vec::new();
        if self.window == 0 {
            problems.push("window must be positive".to_string());
        }
        if self.memory == 0 {
            problems.push("memory must be positive".to_string());
        }
        if !(self.budget_fraction > 0.0 && self.budget_fraction <= 1.0) {
            problems.push(format!(
                "budget fraction must be in (0, 1], got {}",
                self.budget_fraction
            ));
        }
        if self.per_stratum == 0 {
            problems.push("per_stratum must be >= 1".to_string());
        }
        if self.sampling_period == Some(0) {
            problems.push("sampling period must be >= 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SeerError::InvalidConfig(problems))
        }
    }
}

/// Candidate points the pipeline wants labeled, addressed by request id so
/// answers can arrive later.
#[derive(Debug, Clone)]
pub struct LabelRequest {
    pub id: u64,
    pub candidates: Vec<DataPoint>,
}

/// Expert (oracle) reply: any subset of the requested points.
#[derive(Debug, Clone)]
pub struct LabelAnswer {
    pub request_id: u64,
    pub labels: Vec<(u64, ClassId)>,
}

/// What one stream step produced.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub index: u64,
    pub y_online: ClassId,
    pub y_insp: ClassId,
    /// Disagreement bit fed to the change detector.
    pub error: u8,
    pub alarm: Option<Alarm>,
    pub request: Option<LabelRequest>,
}

impl StepOutcome {
    pub fn label_requests(&self) -> &[DataPoint] {
        self.request.as_ref().map_or(&[], |r| &r.candidates)
    }
}

pub struct SeerPipeline {
    online: Box<dyn Model>,
    inspector: Box<dyn Model>,
    inspector_factory: ClassifierFactory,
    detector: Box<dyn ChangeDetector>,
    window: SlidingWindow,
    memory: LabelMemory,
    epsilon: EpsilonEstimate,
    cfg: SeerConfig,
    steps: u64,
    labels_used: u64,
    next_request: u64,
    open_requests: BTreeMap<u64, BTreeMap<u64, DataPoint>>,
    alarms: Vec<Alarm>,
    events: u64,
    inspector_retrained: bool,
}

impl SeerPipeline {
    /// `epsilon` is the training-time estimate reused online (unless the
    /// config re-estimates per window); `inspector_factory` retrains the
    /// inspector after each spreading event.
    pub fn new(
        online: Box<dyn Model>,
        inspector: Box<dyn Model>,
        epsilon: EpsilonEstimate,
        inspector_factory: ClassifierFactory,
        cfg: SeerConfig,
    ) -> Result<Self, SeerError> {
        cfg.validate()?;
        if online.n_features() != inspector.n_features() {
            return Err(SeerError::ModelDimensionMismatch {
                online: online.n_features(),
                inspector: inspector.n_features(),
            });
        }
        Ok(Self {
            window: SlidingWindow::new(cfg.window),
            memory: LabelMemory::new(cfg.memory),
            detector: cfg.detector.build(),
            online,
            inspector,
            inspector_factory,
            epsilon,
            cfg,
            steps: 0,
            labels_used: 0,
            next_request: 0,
            open_requests: BTreeMap::new(),
            alarms: Vec::new(),
            events: 0,
            inspector_retrained: false,
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn labels_used(&self) -> u64 {
        self.labels_used
    }

    pub fn alarms(&self) -> &[Alarm] {
        &self.alarms
    }

    pub fn window(&self) -> &SlidingWindow {
        &self.window
    }

    pub fn memory(&self) -> &LabelMemory {
        &self.memory
    }

    pub fn config(&self) -> &SeerConfig {
        &self.cfg
    }

    /// Process one stream point.
    pub fn step(&mut self, x: DataPoint) -> Result<StepOutcome, SeerError> {
        if x.dim() != self.online.n_features() {
            return Err(SeerError::DimensionMismatch {
                expected: self.online.n_features(),
                got: x.dim(),
            });
        }
        let y_online = self.online.predict(x.features())?;
        let y_insp = self.inspector.predict(x.features())?;
        let error = disagreement(y_online, y_insp);
        // The offline-trained inspector cannot witness concept drift until
        // its first online retraining, so alarms before that are noise.
        let alarm = self
            .detector
            .update(x.index(), f64::from(error))?
            .filter(|_| self.inspector_retrained);
        if let Some(a) = &alarm {
            self.alarms.push(a.clone());
        }
        let index = x.index();
        self.window.push(x)?;
        self.steps += 1;

        let at_boundary = self.steps.is_multiple_of(self.sampling_period() as u64);
        let request = if at_boundary && self.window.is_full() {
            self.open_request()?
        } else {
            None
        };
        Ok(StepOutcome {
            index,
            y_online,
            y_insp,
            error,
            alarm,
            request,
        })
    }

    fn sampling_period(&self) -> usize {
        self.cfg.sampling_period()
    }

    fn open_request(&mut self) -> Result<Option<LabelRequest>, SeerError> {
        self.events += 1;
        let eps = if self.cfg.reestimate_epsilon {
            estimate_epsilon(&self.window.feature_rows())?
        } else {
            self.epsilon.clone()
        };
        let cluster_cfg = WindowClusterConfig::new(
            self.cfg.window,
            derive_seed(self.cfg.seed, 0xC1, self.events),
        );
        let Some(clustering) = cluster_window(&self.window, &eps, &cluster_cfg) else {
            return Ok(None);
        };
        let candidates = stratified_sample(
            &clustering,
            &self.window,
            self.cfg.per_stratum,
            derive_seed(self.cfg.seed, 0x5A, self.events),
        );
        if candidates.is_empty() {
            return Ok(None);
        }
        let id = self.next_request;
        self.next_request += 1;
        self.open_requests.insert(
            id,
            candidates.iter().map(|p| (p.index(), p.clone())).collect(),
        );
        Ok(Some(LabelRequest { id, candidates }))
    }

    /// Ingest an oracle answer: store the labels in memory, spread memory
    /// labels over the current window, and retrain the inspector on the
    /// spread labels. An empty answer just closes the request. Answered
    /// points older than one window behind the current window are dropped
    /// as stale.
    pub fn ingest_labels(&mut self, answer: LabelAnswer) -> Result<(), SeerError> {
        let Some(requested) = self.open_requests.remove(&answer.request_id) else {
            return Err(SeerError::UnknownRequest {
                id: answer.request_id,
            });
        };
        if answer.labels.is_empty() {
            return Ok(());
        }
        for (index, _) in &answer.labels {
            if !requested.contains_key(index) {
                return Err(SeerError::AnswerNotRequested {
                    id: answer.request_id,
                    index: *index,
                });
            }
        }
        self.labels_used += answer.labels.len() as u64;

        let stale_floor = self
            .window
            .oldest_index()
            .unwrap_or(0)
            .saturating_sub(self.cfg.window as u64);
        let mut fresh: Vec<LabeledPoint> = answer
            .labels
            .iter()
            .filter(|(index, _)| *index >= stale_floor)
            .map(|(index, label)| LabeledPoint::new(requested[index].clone(), *label))
            .collect();
        fresh.sort_by_key(|lp| lp.point.index());
        self.memory.insert(fresh);

        let spread = spread_labels(&self.memory, &self.window, &self.cfg.spread)?;
        let training = spread.training_set(&self.window);
        let factory = self
            .inspector_factory
            .with_seed(derive_seed(self.cfg.seed, 0x17, 1));
        self.inspector = factory.train(&training)?;
        if !self.inspector_retrained {
            // First online retraining swaps the offline inspector for a
            // spread-label one; re-anchor the detector to the new pairing
            // instead of flagging the swap itself as drift.
            self.inspector_retrained = true;
            self.detector.reset();
        }
        Ok(())
    }

    /// Swap in a newly trained online model (the runner's alarm-time
    /// retraining path).
    pub fn replace_online(&mut self, model: Box<dyn Model>) -> Result<(), SeerError> {
        if model.n_features() != self.inspector.n_features() {
            return Err(SeerError::ModelDimensionMismatch {
                online: model.n_features(),
                inspector: self.inspector.n_features(),
            });
        }
        self.online = model;
        Ok(())
    }
}

fn derive_seed(base: u64, tag: u64, counter: u64) -> u64 {
    base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ counter.wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// How the simulated expert answers label requests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OraclePolicy {
    /// Label every candidate.
    All,
    /// Label a seeded random fraction of the candidates.
    Fraction(f64),
    /// Label everything until the total budget is spent, then nothing.
    BudgetCapped(usize),
}

/// Simulated expert with ground-truth access. Candidates without a known
/// truth are silently skipped.
pub struct LabelOracle {
    truth: std::collections::HashMap<u64, ClassId>,
    policy: OraclePolicy,
    answered: usize,
    rng: ChaCha8Rng,
}

impl LabelOracle {
    pub fn for_stream(points: &[DataPoint], policy: OraclePolicy, seed: u64) -> Self {
        let truth = points
            .iter()
            .filter_map(|p| p.truth().map(|t| (p.index(), t)))
            .collect();
        Self {
            truth,
            policy,
            answered: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn answered(&self) -> usize {
        self.answered
    }

    pub fn answer(&mut self, request: &LabelRequest) -> LabelAnswer {
        let known: Vec<(u64, ClassId)> = request
            .candidates
            .iter()
            .filter_map(|p| self.truth.get(&p.index()).map(|&t| (p.index(), t)))
            .collect();
        let mut chosen = match self.policy {
            OraclePolicy::All => known,
            OraclePolicy::Fraction(p) => {
                let take = ((p * known.len() as f64).round() as usize).min(known.len());
                let mut picked: Vec<(u64, ClassId)> = known
                    .sample(&mut self.rng, take)
                    .copied()
                    .collect();
                picked.sort_by_key(|(i, _)| *i);
                picked
            }
            OraclePolicy::BudgetCapped(cap) => {
                let remaining = cap.saturating_sub(self.answered);
                known.into_iter().take(remaining).collect()
            }
        };
        chosen.sort_by_key(|(i, _)| *i);
        self.answered += chosen.len();
        LabelAnswer {
            request_id: request.id,
            labels: chosen,
        }
    }
}
