//! Drift Detection Method: monitors a binary error stream through the
//! running error probability `p` and its standard deviation `s`.

use serde::Serialize;

use super::{Alarm, ChangeDetector, DetectorError, DetectorKind, DriftLevel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DdmConfig {
    /// Minimum samples before warnings or alarms are considered.
    pub warmup: u64,
}

impl Default for DdmConfig {
    fn default() -> Self {
        Self { warmup: 30 }
    }
}

/// Level reported for one sample.
pub type DdmLevel = DriftLevel;

#[derive(Debug, Clone, PartialEq)]
pub struct Ddm {
    cfg: DdmConfig,
    n: u64,
    p: f64,
    p_min: f64,
    s_min: f64,
    level: DriftLevel,
}

impl Ddm {
    pub fn new(cfg: DdmConfig) -> Self {
        Self {
            cfg,
            n: 0,
            p: 0.0,
            p_min: f64::INFINITY,
            s_min: f64::INFINITY,
            level: DriftLevel::Stable,
        }
    }

    pub fn config(&self) -> &DdmConfig {
        &self.cfg
    }

    /// Running error probability (exactly error count / n).
    pub fn error_rate(&self) -> f64 {
        self.p
    }

    fn std_dev(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.p * (1.0 - self.p) / self.n as f64).sqrt()
        }
    }

    /// Feed one binary error observation.
    ///
    /// Thresholds follow the usual DDM rule with strict comparisons, so an
    /// all-correct stream (p = s = 0) never leaves the stable level:
    /// warning when `p + s > p_min + 2 s_min`, drift when
    /// `p + s > p_min + 3 s_min`. A drift resets the state.
    pub fn update_error(&mut self, index: u64, error: bool) -> (DdmLevel, Option<Alarm>) {
        self.n += 1;
        let e = if error { 1.0 } else { 0.0 };
        self.p += (e - self.p) / self.n as f64;
        let s = self.std_dev();
        if self.n < self.cfg.warmup {
            self.level = DriftLevel::Stable;
            return (self.level, None);
        }
        if self.p + s < self.p_min + self.s_min {
            self.p_min = self.p;
            self.s_min = s;
        }
        let stat = self.p + s;
        if stat > self.p_min + 3.0 * self.s_min {
            self.reset();
            self.level = DriftLevel::Drift;
            let alarm = Alarm {
                index,
                detector: DetectorKind::Ddm,
                statistic: stat,
            };
            return (self.level, Some(alarm));
        }
        self.level = if stat > self.p_min + 2.0 * self.s_min {
            DriftLevel::Warning
        } else {
            DriftLevel::Stable
        };
        (self.level, None)
    }
}

impl ChangeDetector for Ddm {
    /// Trait adapter over a binary stream: any non-zero value counts as an
    /// error.
    fn update(&mut self, index: u64, value: f64) -> Result<Option<Alarm>, DetectorError> {
        if !value.is_finite() {
            return Err(DetectorError::NonFiniteValue { value });
        }
        let (_, alarm) = self.update_error(index, value != 0.0);
        Ok(alarm)
    }

    fn level(&self) -> DriftLevel {
        self.level
    }

    fn reset(&mut self) {
        self.n = 0;
        self.p = 0.0;
        self.p_min = f64::INFINITY;
        self.s_min = f64::INFINITY;
        self.level = DriftLevel::Stable;
    }

    fn kind(&self) -> DetectorKind {
        DetectorKind::Ddm
    }

    fn samples_seen(&self) -> u64 {
        self.n
    }
}
