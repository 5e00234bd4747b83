//! Drift matching, metric computation, experiment runners and reports.

mod experiment;
mod presets;

pub use experiment::{
    labeled_prefix, mode_names, run_experiment, Aggregate, ExperimentConfig, Mode,
    OraclePolicyChoice, Report, SeedResult,
};
pub use presets::{expand_preset, preset_names};

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::stream::ClassId;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unknown experiment mode '{name}' (known: {known})")]
    UnknownMode { name: String, known: String },
    #[error("unknown preset '{name}' (known: {known})")]
    UnknownPreset { name: String, known: String },
    #[error("stream of {len} points is shorter than the training prefix {prefix}")]
    StreamTooShort { len: usize, prefix: usize },
    #[error("point {index} carries no ground-truth label")]
    MissingTruth { index: u64 },
    #[error("need at least one seed")]
    NoSeeds,
    #[error("log row {row}: {message}")]
    MalformedLog { row: usize, message: String },
    #[error(transparent)]
    Seer(#[from] crate::pipeline::SeerError),
    #[error(transparent)]
    Train(#[from] crate::classify::TrainError),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error(transparent)]
    Cluster(#[from] crate::cluster::ClusterError),
    #[error(transparent)]
    Model(#[from] crate::classify::ModelError),
    #[error(transparent)]
    Detector(#[from] crate::detect::DetectorError),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// One per-step record of an experiment run, the unit the log CSV stores.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub index: u64,
    pub y_online: ClassId,
    pub y_insp: ClassId,
    pub true_label: Option<ClassId>,
    /// Bit fed to the change detector at this step (disagreement for the
    /// semi-supervised pipeline, misclassification for supervised modes).
    pub error: u8,
    pub alarm: bool,
    pub requested: bool,
    pub labeled: bool,
    /// Cumulative count of oracle labels consumed up to this step.
    pub labels_used: u64,
}

/// Full per-run record: every step plus the alarm indices.
#[derive(Debug, Clone, Default)]
pub struct RunLog {
    pub records: Vec<StepRecord>,
    pub seed: u64,
}

impl RunLog {
    pub fn alarm_indices(&self) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| r.alarm)
            .map(|r| r.index)
            .collect()
    }

    pub fn labels_total(&self) -> u64 {
        self.records.last().map_or(0, |r| r.labels_used)
    }

    pub const CSV_HEADER: &'static str =
        "index,y_online,y_insp,true_label,error,alarm,requested,labeled,labels_used";

    /// Line-delimited CSV with the documented header. `true_label` is empty
    /// when the stream carries no ground truth at that point.
    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.index,
                r.y_online,
                r.y_insp,
                r.true_label.map_or_else(String::new, |l| l.to_string()),
                r.error,
                u8::from(r.alarm),
                u8::from(r.requested),
                u8::from(r.labeled),
                r.labels_used,
            )?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<Self, EvalError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(EvalError::MalformedLog {
            row: 1,
            message: "empty log".into(),
        })?;
        if header.trim() != Self::CSV_HEADER {
            return Err(EvalError::MalformedLog {
                row: 1,
                message: format!("unexpected header '{header}'"),
            });
        }
        let mut records = Vec::new();
        for (i, line) in lines {
            let row = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 9 {
                return Err(EvalError::MalformedLog {
                    row,
                    message: format!("expected 9 columns, got {}", cells.len()),
                });
            }
            let parse_u64 = |cell: &str, what: &str| -> Result<u64, EvalError> {
                cell.trim().parse().map_err(|_| EvalError::MalformedLog {
                    row,
                    message: format!("bad {what} '{cell}'"),
                })
            };
            let true_label = if cells[3].trim().is_empty() {
                None
            } else {
                Some(parse_u64(cells[3], "true_label")? as ClassId)
            };
            records.push(StepRecord {
                index: parse_u64(cells[0], "index")?,
                y_online: parse_u64(cells[1], "y_online")? as ClassId,
                y_insp: parse_u64(cells[2], "y_insp")? as ClassId,
                true_label,
                error: parse_u64(cells[4], "error")? as u8,
                alarm: parse_u64(cells[5], "alarm")? != 0,
                requested: parse_u64(cells[6], "requested")? != 0,
                labeled: parse_u64(cells[7], "labeled")? != 0,
                labels_used: parse_u64(cells[8], "labels_used")?,
            });
        }
        Ok(Self {
            records,
            seed: 0,
        })
    }
}

/// Outcome of greedy earliest-first drift matching.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// `(ground truth index, detection index)` pairs.
    pub pairs: Vec<(u64, u64)>,
}

/// Match detections against ground-truth drifts: walking detections in
/// ascending order, each one claims the earliest unmatched ground-truth
/// drift `g` with `g <= d <= g + horizon`. Unmatched detections are false
/// positives; unmatched drifts are false negatives. Detections before a
/// drift never match it.
pub fn match_drifts(detected: &[u64], gt: &[u64], horizon: u64) -> MatchResult {
    let mut detected = detected.to_vec();
    detected.sort_unstable();
    let mut gt = gt.to_vec();
    gt.sort_unstable();

    let mut taken = vec![false; gt.len()];
    let mut pairs = Vec::new();
    let mut fp = 0usize;
    for d in detected {
        let slot = gt
            .iter()
            .enumerate()
            .find(|(gi, &g)| !taken[*gi] && g <= d && d <= g + horizon);
        match slot {
            Some((gi, &g)) => {
                taken[gi] = true;
                pairs.push((g, d));
            }
            None => fp += 1,
        }
    }
    let tp = pairs.len();
    MatchResult {
        tp,
        fp,
        fn_: gt.len() - tp,
        pairs,
    }
}

/// Aggregated run metrics. Ratios with an empty denominator are reported
/// as `None` (distinct from zero).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    /// Model accuracy over the test stream, in percent.
    pub macc: f64,
    /// Detection precision in percent; `None` when nothing was detected.
    pub precision: Option<f64>,
    /// Detection recall in percent; `None` when there is no ground truth.
    pub recall: Option<f64>,
    /// Labels consumed as a percentage of the test stream.
    pub lbl: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub pairs: Vec<(u64, u64)>,
    pub alarms: Vec<u64>,
}

/// Compute MAcc / precision / recall / Lbl% for a finished run log.
pub fn compute_metrics(log: &RunLog, gt: &[u64], horizon: u64) -> Metrics {
    let mut correct = 0usize;
    let mut with_truth = 0usize;
    for r in &log.records {
        if let Some(t) = r.true_label {
            with_truth += 1;
            correct += usize::from(r.y_online == t);
        }
    }
    let macc = if with_truth == 0 {
        0.0
    } else {
        100.0 * correct as f64 / with_truth as f64
    };
    let alarms = log.alarm_indices();
    let matched = match_drifts(&alarms, gt, horizon);
    let precision = if matched.tp + matched.fp == 0 {
        None
    } else {
        Some(100.0 * matched.tp as f64 / (matched.tp + matched.fp) as f64)
    };
    let recall = if gt.is_empty() {
        None
    } else {
        Some(100.0 * matched.tp as f64 / gt.len() as f64)
    };
    let lbl = if log.records.is_empty() {
        0.0
    } else {
        100.0 * log.labels_total() as f64 / log.records.len() as f64
    };
    Metrics {
        macc,
        precision,
        recall,
        lbl,
        tp: matched.tp,
        fp: matched.fp,
        fn_: matched.fn_,
        pairs: matched.pairs,
        alarms,
    }
}
