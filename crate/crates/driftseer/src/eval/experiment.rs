//! Baseline and pipeline experiment runners.
//!
//! Every mode trains the online model on the labeled stream prefix and
//! walks the remainder as an unlabeled time series. Per-seed runs derive
//! every RNG (stream, model training, sampling) from that round's seed, so
//! a report is a pure function of (config, seeds).

use serde::Serialize;

use super::{compute_metrics, EvalError, Metrics, RunLog, StepRecord};
use crate::classify::{ClassifierFactory, ClassifierKind, Model, ModelFactory, TrainConfig};
use crate::cluster::estimate_epsilon;
use crate::data::StreamSpec;
use crate::detect::ChangeDetector;
use crate::pipeline::{LabelOracle, OraclePolicy, SeerConfig, SeerPipeline};
use crate::stream::{DataPoint, LabeledPoint};

/// Experiment flavor, registered by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// Static online model, no detector: the accuracy floor.
    None,
    /// Fully labeled stream feeding the detector; retrain on alarm.
    SupervisedPht,
    /// The semi-supervised pipeline under its label budget.
    CdSeer,
    /// Supervised detector over the static model's error stream; its
    /// detections serve as pseudo ground truth for unlabeled datasets.
    PhtNoRetrainGt,
}

impl Mode {
    pub fn by_name(name: &str) -> Result<Self, EvalError> {
        match name {
            "none" => Ok(Mode::None),
            "supervised_pht" => Ok(Mode::SupervisedPht),
            "cdseer" => Ok(Mode::CdSeer),
            "pht_no_retrain_gt" => Ok(Mode::PhtNoRetrainGt),
            other => Err(EvalError::UnknownMode {
                name: other.to_string(),
                known: mode_names().join(", "),
            }),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::None => "none",
            Mode::SupervisedPht => "supervised_pht",
            Mode::CdSeer => "cdseer",
            Mode::PhtNoRetrainGt => "pht_no_retrain_gt",
        }
    }
}

pub fn mode_names() -> Vec<&'static str> {
    vec!["none", "supervised_pht", "cdseer", "pht_no_retrain_gt"]
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub stream: StreamSpec,
    pub mode: Mode,
    /// Labeled points used to train the online model (and to size its
    /// alarm-time retraining window).
    pub train_prefix: usize,
    pub model_kind: ClassifierKind,
    pub model: TrainConfig,
    pub seer: SeerConfig,
    /// Matching horizon; `None` means twice the window.
    pub horizon: Option<u64>,
    pub oracle: OraclePolicyChoice,
}

/// Oracle policy selection that still needs the stream length to become a
/// concrete [`OraclePolicy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OraclePolicyChoice {
    All,
    Fraction(f64),
    /// Cap the answered labels at the pipeline's budget fraction.
    BudgetCapped,
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, stream: StreamSpec, mode: Mode) -> Self {
        Self {
            name: name.into(),
            stream,
            mode,
            train_prefix: 1_000,
            model_kind: ClassifierKind::RandomForest,
            model: TrainConfig::default(),
            seer: SeerConfig::default(),
            horizon: None,
            oracle: OraclePolicyChoice::BudgetCapped,
        }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon.unwrap_or(2 * self.seer.window as u64)
    }

    fn factory(&self, seed: u64) -> ClassifierFactory {
        ClassifierFactory::new(self.model_kind, self.model.clone().with_seed(seed))
    }

    fn oracle_policy(&self, test_len: usize) -> OraclePolicy {
        match self.oracle {
            OraclePolicyChoice::All => OraclePolicy::All,
            OraclePolicyChoice::Fraction(p) => OraclePolicy::Fraction(p),
            OraclePolicyChoice::BudgetCapped => OraclePolicy::BudgetCapped(
                (self.seer.budget_fraction * test_len as f64).floor() as usize,
            ),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedResult {
    pub seed: u64,
    pub metrics: Metrics,
    #[serde(skip)]
    pub log: RunLog,
}

/// Mean-over-seeds aggregate; ratio metrics average over the seeds where
/// they were defined.
#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub macc: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub lbl: f64,
    pub precision_defined: usize,
    pub recall_defined: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub mode: Mode,
    pub gt_drifts: Vec<u64>,
    pub horizon: u64,
    pub config: ExperimentConfig,
    pub seeds: Vec<SeedResult>,
    pub aggregate: Aggregate,
}

impl Report {
    /// One flat CSV row per seed plus a `mean` row, for spreadsheet diffing.
    pub const SUMMARY_HEADER: &'static str =
        "name,mode,window,memory,seed,macc,precision,recall,lbl,tp,fp,fn,labels";

    pub fn summary_rows(&self) -> Vec<String> {
        let fmt_opt = |v: Option<f64>| v.map_or_else(|| "na".to_string(), |x| format!("{x:.2}"));
        let mut rows: Vec<String> = self
            .seeds
            .iter()
            .map(|s| {
                format!(
                    "{},{},{},{},{},{:.2},{},{},{:.3},{},{},{},{}",
                    self.name,
                    self.mode.as_str(),
                    self.config.seer.window,
                    self.config.seer.memory,
                    s.seed,
                    s.metrics.macc,
                    fmt_opt(s.metrics.precision),
                    fmt_opt(s.metrics.recall),
                    s.metrics.lbl,
                    s.metrics.tp,
                    s.metrics.fp,
                    s.metrics.fn_,
                    s.log.labels_total(),
                )
            })
            .collect();
        rows.push(format!(
            "{},{},{},{},mean,{:.2},{},{},{:.3},,,,",
            self.name,
            self.mode.as_str(),
            self.config.seer.window,
            self.config.seer.memory,
            self.aggregate.macc,
            fmt_opt(self.aggregate.precision),
            fmt_opt(self.aggregate.recall),
            self.aggregate.lbl,
        ));
        rows
    }
}

/// Evaluator privilege: reveal the ground truth of a stream prefix to build
/// a training set. Fails if any point lacks a label.
pub fn labeled_prefix(points: &[DataPoint], n: usize) -> Result<Vec<LabeledPoint>, EvalError> {
    points
        .iter()
        .take(n)
        .map(|p| {
            p.truth()
                .map(|t| LabeledPoint::new(p.clone(), t))
                .ok_or(EvalError::MissingTruth { index: p.index() })
        })
        .collect()
}

fn labeled_suffix(points: &[DataPoint], upto: usize, n: usize) -> Result<Vec<LabeledPoint>, EvalError> {
    let start = upto.saturating_sub(n);
    points[start..upto]
        .iter()
        .map(|p| {
            p.truth()
                .map(|t| LabeledPoint::new(p.clone(), t))
                .ok_or(EvalError::MissingTruth { index: p.index() })
        })
        .collect()
}

fn derive(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Run one experiment across seeds and aggregate.
pub fn run_experiment(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Report, EvalError> {
    if seeds.is_empty() {
        return Err(EvalError::NoSeeds);
    }
    let gt = cfg.stream.schedule.drift_indices();
    let horizon = cfg.horizon();

    // Seeds are independent; fan out across a couple of workers.
    let mut results: Vec<(usize, Result<SeedResult, EvalError>)> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = seeds
                .iter()
                .enumerate()
                .map(|(i, &seed)| {
                    let cfg = &*cfg;
                    let gt = &gt;
                    scope.spawn(move || (i, run_seed(cfg, seed, gt, horizon)))
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
    results.sort_by_key(|(i, _)| *i);
    let seeds_out: Vec<SeedResult> = results
        .into_iter()
        .map(|(_, r)| r)
        .collect::<Result<_, _>>()?;

    let aggregate = aggregate(&seeds_out);
    Ok(Report {
        name: cfg.name.clone(),
        mode: cfg.mode,
        gt_drifts: gt,
        horizon,
        config: cfg.clone(),
        seeds: seeds_out,
        aggregate,
    })
}

fn aggregate(seeds: &[SeedResult]) -> Aggregate {
    let n = seeds.len() as f64;
    let macc = seeds.iter().map(|s| s.metrics.macc).sum::<f64>() / n;
    let lbl = seeds.iter().map(|s| s.metrics.lbl).sum::<f64>() / n;
    let defined = |get: fn(&Metrics) -> Option<f64>| {
        let values: Vec<f64> = seeds.iter().filter_map(|s| get(&s.metrics)).collect();
        if values.is_empty() {
            (None, 0)
        } else {
            (
                Some(values.iter().sum::<f64>() / values.len() as f64),
                values.len(),
            )
        }
    };
    let (precision, precision_defined) = defined(|m| m.precision);
    let (recall, recall_defined) = defined(|m| m.recall);
    Aggregate {
        macc,
        precision,
        recall,
        lbl,
        precision_defined,
        recall_defined,
    }
}

fn run_seed(
    cfg: &ExperimentConfig,
    seed: u64,
    gt: &[u64],
    horizon: u64,
) -> Result<SeedResult, EvalError> {
    let points = cfg.stream.generate_seeded(seed)?;
    if points.len() <= cfg.train_prefix {
        return Err(EvalError::StreamTooShort {
            len: points.len(),
            prefix: cfg.train_prefix,
        });
    }
    let train_set = labeled_prefix(&points, cfg.train_prefix)?;
    let online = cfg.factory(derive(seed, 0x01)).train(&train_set)?;
    let log = match cfg.mode {
        Mode::None => run_static(cfg, &points, online, seed, false)?,
        Mode::PhtNoRetrainGt => run_static(cfg, &points, online, seed, true)?,
        Mode::SupervisedPht => run_supervised(cfg, &points, online, seed)?,
        Mode::CdSeer => run_cdseer(cfg, &points, &train_set, online, seed)?,
    };
    let metrics = compute_metrics(&log, gt, horizon);
    Ok(SeedResult { seed, metrics, log })
}

/// Static model; optionally a supervised detector watches its true-error
/// stream without triggering any retraining (the pseudo-ground-truth mode).
fn run_static(
    cfg: &ExperimentConfig,
    points: &[DataPoint],
    online: Box<dyn Model>,
    seed: u64,
    with_detector: bool,
) -> Result<RunLog, EvalError> {
    let mut detector = with_detector.then(|| cfg.seer.detector.build());
    let test = &points[cfg.train_prefix..];
    let mut records = Vec::with_capacity(test.len());
    let mut labels_used = 0u64;
    for p in test {
        let y = online.predict(p.features())?;
        let truth = p.truth();
        let mut error = 0u8;
        let mut alarm = false;
        if let Some(det) = detector.as_mut() {
            let t = truth.ok_or(EvalError::MissingTruth { index: p.index() })?;
            error = u8::from(y != t);
            alarm = det.update(p.index(), f64::from(error))?.is_some();
            labels_used += 1;
        }
        records.push(StepRecord {
            index: p.index(),
            y_online: y,
            y_insp: y,
            true_label: truth,
            error,
            alarm,
            requested: false,
            labeled: false,
            labels_used,
        });
    }
    Ok(RunLog { records, seed })
}

/// Supervised baseline: the detector sees the online model's true-error
/// bit for every point; an alarm retrains the online model on the most
/// recent `train_prefix` points with true labels.
fn run_supervised(
    cfg: &ExperimentConfig,
    points: &[DataPoint],
    mut online: Box<dyn Model>,
    seed: u64,
) -> Result<RunLog, EvalError> {
    let mut detector: Box<dyn ChangeDetector> = cfg.seer.detector.build();
    let mut records = Vec::with_capacity(points.len() - cfg.train_prefix);
    let mut retrains = 0u64;
    for (pos, p) in points.iter().enumerate().skip(cfg.train_prefix) {
        let y = online.predict(p.features())?;
        let t = p
            .truth()
            .ok_or(EvalError::MissingTruth { index: p.index() })?;
        let error = u8::from(y != t);
        // Supervised monitoring consumes the truth of every point.
        let labels_used = (pos + 1 - cfg.train_prefix) as u64;
        let alarm = detector.update(p.index(), f64::from(error))?.is_some();
        if alarm {
            retrains += 1;
            let recent = labeled_suffix(points, pos + 1, cfg.train_prefix)?;
            online = cfg.factory(derive(seed, 0x100 + retrains)).train(&recent)?;
        }
        records.push(StepRecord {
            index: p.index(),
            y_online: y,
            y_insp: y,
            true_label: Some(t),
            error,
            alarm,
            requested: false,
            labeled: false,
            labels_used,
        });
    }
    Ok(RunLog { records, seed })
}

/// The semi-supervised pipeline. The oracle answers label requests under
/// the configured policy; when an alarm fires and the config enables it,
/// the runner retrains the online model on the most recent window of
/// oracle-labeled history (labels granted by the evaluator).
fn run_cdseer(
    cfg: &ExperimentConfig,
    points: &[DataPoint],
    train_set: &[LabeledPoint],
    online: Box<dyn Model>,
    seed: u64,
) -> Result<RunLog, EvalError> {
    let test = &points[cfg.train_prefix..];
    // The inspector starts from the last window of the training data.
    let inspector_start = train_set.len().saturating_sub(cfg.seer.window);
    let inspector = cfg
        .factory(derive(seed, 0x02))
        .train(&train_set[inspector_start..])?;
    let features: Vec<&[f64]> = train_set.iter().map(|lp| lp.point.features()).collect();
    let epsilon = estimate_epsilon(&features)?;

    let seer_cfg = SeerConfig {
        seed: derive(seed, 0x03),
        ..cfg.seer.clone()
    };
    let mut pipeline = SeerPipeline::new(
        online,
        inspector,
        epsilon,
        cfg.factory(0),
        seer_cfg,
    )?;
    let mut oracle = LabelOracle::for_stream(
        test,
        cfg.oracle_policy(test.len()),
        derive(seed, 0x04),
    );

    let mut records = Vec::with_capacity(test.len());
    let mut retrains = 0u64;
    for (pos, p) in points.iter().enumerate().skip(cfg.train_prefix) {
        let outcome = pipeline.step(p.clone())?;
        let mut labeled = false;
        let requested = outcome.request.is_some();
        if let Some(request) = outcome.request {
            let answer = oracle.answer(&request);
            labeled = !answer.labels.is_empty();
            pipeline.ingest_labels(answer)?;
        }
        if outcome.alarm.is_some() && cfg.seer.retrain_online_on_alarm {
            retrains += 1;
            let recent = labeled_suffix(points, pos + 1, cfg.seer.window)?;
            let model = cfg.factory(derive(seed, 0x200 + retrains)).train(&recent)?;
            pipeline.replace_online(model)?;
        }
        records.push(StepRecord {
            index: p.index(),
            y_online: outcome.y_online,
            y_insp: outcome.y_insp,
            true_label: p.truth(),
            error: outcome.error,
            alarm: outcome.alarm.is_some(),
            requested,
            labeled,
            labels_used: pipeline.labels_used(),
        });
    }
    Ok(RunLog { records, seed })
}
