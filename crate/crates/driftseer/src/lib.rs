//! Semi-supervised concept drift detection for data streams.
//!
//! The monitored (online) model keeps classifying the stream while a
//! shadow inspector model, retrained online from a small expert label
//! budget, predicts alongside it. A supervised change detector watches the
//! per-point disagreement between the two; when the disagreement
//! distribution shifts, the deployed model has drifted off the live
//! concept. Labels are requested in planned batches: the recent window is
//! clustered, one candidate per stratum goes to the expert, and the few
//! answers spread across the whole window through a similarity graph to
//! form the inspector's next training set.
//!
//! The crate also ships the synthetic drift benchmarks (sine and SEA along
//! with CSV ingestion for external data) and the evaluation harness that
//! scores detectors by model accuracy, drift precision/recall and label
//! budget.
//!
//! Interchangeable strategies (change detectors, classifier architectures,
//! stream generators, experiment modes) each sit behind a trait or enum
//! registered by name, so configs and the CLI select them at runtime.

pub mod classify;
pub mod cluster;
pub mod data;
pub mod detect;
pub mod eval;
pub mod pipeline;
pub mod spread;
pub mod stream;

pub use stream::{ClassId, DataPoint, LabelMemory, LabeledPoint, SlidingWindow};
