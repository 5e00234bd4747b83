//! Synthetic stream generators with injected concept drifts plus CSV
//! ingestion for external datasets.
//!
//! A drift schedule only switches the labeling rule: the feature stream is
//! drawn before labels are computed, so two schedules under the same seed
//! produce identical features and the injected drift is a pure concept
//! drift.

mod csv_io;
mod generators;

pub use csv_io::{export_csv, load_csv, CsvError, CsvSchema};
pub use generators::{concept_label, gen_sea, gen_sine};

use serde::Serialize;
use thiserror::Error;

use crate::stream::DataPoint;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("drift indices must be strictly increasing, got {prev} then {next}")]
    UnorderedSchedule { prev: u64, next: u64 },
    #[error("unknown concept id {concept} for generator '{generator}'")]
    UnknownConcept { concept: u8, generator: String },
    #[error("unknown generator '{name}' (known: sine, sea, csv)")]
    UnknownGenerator { name: String },
    #[error("stream length must be positive")]
    EmptyStream,
    #[error("csv stream spec needs a path")]
    MissingCsvPath,
}

/// Which labeling rule is active from which stream index. Concept 0 is
/// implicit from index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct DriftSchedule {
    changes: Vec<(u64, u8)>,
}

impl DriftSchedule {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(changes: Vec<(u64, u8)>) -> Result<Self, DataError> {
        for pair in changes.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(DataError::UnorderedSchedule {
                    prev: pair[0].0,
                    next: pair[1].0,
                });
            }
        }
        Ok(Self { changes })
    }

    /// The benchmark default: drift to concept 1 at 3,000 and to concept 2
    /// at 10,000.
    pub fn benchmark_default() -> Self {
        Self {
            changes: vec![(3_000, 1), (10_000, 2)],
        }
    }

    pub fn concept_at(&self, index: u64) -> u8 {
        let mut concept = 0;
        for &(start, c) in &self.changes {
            if index >= start {
                concept = c;
            } else {
                break;
            }
        }
        concept
    }

    /// Ground-truth drift positions.
    pub fn drift_indices(&self) -> Vec<u64> {
        self.changes.iter().map(|&(i, _)| i).collect()
    }

    pub fn changes(&self) -> &[(u64, u8)] {
        &self.changes
    }

    pub fn max_concept(&self) -> u8 {
        self.changes.iter().map(|&(_, c)| c).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GeneratorKind {
    Sine,
    Sea,
    Csv,
}

impl GeneratorKind {
    pub fn by_name(name: &str) -> Result<Self, DataError> {
        match name {
            "sine" => Ok(GeneratorKind::Sine),
            "sea" => Ok(GeneratorKind::Sea),
            "csv" => Ok(GeneratorKind::Csv),
            other => Err(DataError::UnknownGenerator {
                name: other.to_string(),
            }),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            GeneratorKind::Sine => "sine",
            GeneratorKind::Sea => "sea",
            GeneratorKind::Csv => "csv",
        }
    }
}

/// Everything needed to materialize a stream.
#[derive(Debug, Clone, Serialize)]
pub struct StreamSpec {
    pub generator: GeneratorKind,
    pub n: usize,
    pub schedule: DriftSchedule,
    pub seed: u64,
    /// Source file and column layout when `generator` is `Csv`.
    pub csv_path: Option<String>,
    #[serde(skip)]
    pub csv_schema: CsvSchema,
}

impl StreamSpec {
    pub fn synthetic(generator: GeneratorKind, n: usize, seed: u64) -> Self {
        Self {
            generator,
            n,
            schedule: DriftSchedule::benchmark_default(),
            seed,
            csv_path: None,
            csv_schema: CsvSchema::default(),
        }
    }

    /// Materialize the stream. Points carry their hidden ground-truth label.
    pub fn generate(&self) -> Result<Vec<DataPoint>, DataError> {
        self.generate_seeded(self.seed)
    }

    /// Materialize with an explicit seed (per-round reruns).
    pub fn generate_seeded(&self, seed: u64) -> Result<Vec<DataPoint>, DataError> {
        match self.generator {
            GeneratorKind::Sine => gen_sine(self.n, &self.schedule, seed),
            GeneratorKind::Sea => gen_sea(self.n, &self.schedule, seed),
            GeneratorKind::Csv => {
                let path = self.csv_path.as_ref().ok_or(DataError::MissingCsvPath)?;
                load_csv(std::path::Path::new(path), &self.csv_schema)
                    .map_err(|e| DataError::UnknownGenerator {
                        name: format!("csv load failed: {e}"),
                    })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_orders_and_reports_concepts() {
        let s = DriftSchedule::new(vec![(10, 1), (20, 2)]).unwrap();
        assert_eq!(s.concept_at(0), 0);
        assert_eq!(s.concept_at(10), 1);
        assert_eq!(s.concept_at(19), 1);
        assert_eq!(s.concept_at(20), 2);
        assert_eq!(s.drift_indices(), vec![10, 20]);
    }

    #[test]
    fn schedule_rejects_unordered_changes() {
        assert!(DriftSchedule::new(vec![(10, 1), (10, 2)]).is_err());
        assert!(DriftSchedule::new(vec![(20, 1), (10, 2)]).is_err());
    }

    #[test]
    fn generator_registry_resolves_names() {
        assert_eq!(GeneratorKind::by_name("sine").unwrap(), GeneratorKind::Sine);
        assert_eq!(GeneratorKind::by_name("sea").unwrap(), GeneratorKind::Sea);
        assert!(GeneratorKind::by_name("agrawal").is_err());
    }
}
