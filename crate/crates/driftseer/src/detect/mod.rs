//! Supervised change detectors over a univariate error stream.
//!
//! Every detector implements [`ChangeDetector`] and is registered under a
//! short name ("pht", "ddm") so configs and the CLI can pick one at runtime.
//! Detectors are pure state machines: identical input sequences produce
//! identical alarm indices, and an alarm resets the detector to its
//! construction-time state so retrain-then-continue protocols do not cause
//! alarm storms.

mod ddm;
mod page_hinkley;

pub use ddm::{Ddm, DdmConfig, DdmLevel};
pub use page_hinkley::{PageHinkley, PhtConfig};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DetectorError {
    #[error("detector input must be finite, got {value}")]
    NonFiniteValue { value: f64 },
    #[error("unknown detector '{name}' (known: {known})")]
    UnknownDetector { name: String, known: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DetectorKind {
    PageHinkley,
    Ddm,
}

impl DetectorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorKind::PageHinkley => "pht",
            DetectorKind::Ddm => "ddm",
        }
    }
}

/// Detector output level for the last processed sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftLevel {
    Stable,
    Warning,
    Drift,
}

/// Raised when a detector's threshold condition held at a stream index.
#[derive(Debug, Clone, PartialEq)]
pub struct Alarm {
    pub index: u64,
    pub detector: DetectorKind,
    /// Value of the monitored statistic at the moment it crossed.
    pub statistic: f64,
}

/// Common interface for detectors that watch a univariate stream (binary
/// disagreement bits or real-valued error rates).
pub trait ChangeDetector: Send {
    /// Feed one observation. `index` is the stream position attached to any
    /// alarm raised by this sample. On alarm the detector resets itself.
    fn update(&mut self, index: u64, value: f64) -> Result<Option<Alarm>, DetectorError>;

    /// Level assigned to the last processed sample.
    fn level(&self) -> DriftLevel;

    /// Restore the construction-time state, keeping parameters.
    fn reset(&mut self);

    fn kind(&self) -> DetectorKind;

    fn samples_seen(&self) -> u64;
}

/// Detector selection plus parameters, as carried by configs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DetectorConfig {
    PageHinkley(PhtConfig),
    Ddm(DdmConfig),
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig::PageHinkley(PhtConfig::default())
    }
}

impl DetectorConfig {
    pub fn kind(&self) -> DetectorKind {
        match self {
            DetectorConfig::PageHinkley(_) => DetectorKind::PageHinkley,
            DetectorConfig::Ddm(_) => DetectorKind::Ddm,
        }
    }

    /// Default-parameter config for a registered detector name.
    pub fn by_name(name: &str) -> Result<Self, DetectorError> {
        match name {
            "pht" | "page_hinkley" => Ok(DetectorConfig::PageHinkley(PhtConfig::default())),
            "ddm" => Ok(DetectorConfig::Ddm(DdmConfig::default())),
            other => Err(DetectorError::UnknownDetector {
                name: other.to_string(),
                known: detector_names().join(", "),
            }),
        }
    }

    pub fn build(&self) -> Box<dyn ChangeDetector> {
        match self {
            DetectorConfig::PageHinkley(cfg) => Box::new(PageHinkley::new(cfg.clone())),
            DetectorConfig::Ddm(cfg) => Box::new(Ddm::new(cfg.clone())),
        }
    }
}

/// Names accepted by [`DetectorConfig::by_name`].
pub fn detector_names() -> Vec<&'static str> {
    vec!["pht", "ddm"]
}
