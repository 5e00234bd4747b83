//! One-sided Page-Hinkley test for increases in a stream's mean.

use serde::Serialize;

use super::{Alarm, ChangeDetector, DetectorError, DetectorKind, DriftLevel};

/// Page-Hinkley parameters.
///
/// Defaults assume the monitored stream is a 0/1 disagreement indicator
/// where only increases matter; the values follow common stream-mining
/// practice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhtConfig {
    /// Magnitude tolerance subtracted from every deviation.
    pub delta: f64,
    /// Alarm threshold on `m_T - min(m_t)`.
    pub lambda: f64,
    /// Forgetting factor in (0, 1] applied to the running mean; 1.0 keeps a
    /// plain running mean, smaller values weight history down with an
    /// effective window of `1 / (1 - alpha)` samples.
    pub alpha: f64,
}

impl Default for PhtConfig {
    fn default() -> Self {
        Self {
            delta: 0.005,
            lambda: 50.0,
            alpha: 0.9999,
        }
    }
}

/// Running state of the test.
///
/// The cumulative statistic is `m_T = sum_t (x_t - mean_t - delta)` where
/// `mean_t` is the (forgetting) running mean including `x_t`. An alarm fires
/// as soon as `m_T - min(m_t) >= lambda`, after which the state resets.
#[derive(Debug, Clone, PartialEq)]
pub struct PageHinkley {
    cfg: PhtConfig,
    weight: f64,
    mean: f64,
    cum: f64,
    min_cum: f64,
    n: u64,
    level: DriftLevel,
}

impl PageHinkley {
    pub fn new(cfg: PhtConfig) -> Self {
        assert!(cfg.delta >= 0.0, "delta must be >= 0");
        assert!(cfg.lambda > 0.0, "lambda must be > 0");
        assert!(
            cfg.alpha > 0.0 && cfg.alpha <= 1.0,
            "alpha must be in (0, 1]"
        );
        Self {
            cfg,
            weight: 0.0,
            mean: 0.0,
            cum: 0.0,
            min_cum: 0.0,
            n: 0,
            level: DriftLevel::Stable,
        }
    }

    pub fn config(&self) -> &PhtConfig {
        &self.cfg
    }

    /// Current value of `m_T - min(m_t)`.
    pub fn statistic(&self) -> f64 {
        self.cum - self.min_cum
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }
}

impl ChangeDetector for PageHinkley {
    fn update(&mut self, index: u64, value: f64) -> Result<Option<Alarm>, DetectorError> {
        if !value.is_finite() {
            return Err(DetectorError::NonFiniteValue { value });
        }
        self.n += 1;
        // Exponentially-weighted running mean: at alpha = 1 the weight equals
        // the sample count and this is the exact running mean.
        self.weight = self.cfg.alpha * self.weight + 1.0;
        self.mean += (value - self.mean) / self.weight;
        self.cum += value - self.mean - self.cfg.delta;
        if self.cum < self.min_cum {
            self.min_cum = self.cum;
        }
        let stat = self.cum - self.min_cum;
        if stat >= self.cfg.lambda {
            self.reset();
            self.level = DriftLevel::Drift;
            return Ok(Some(Alarm {
                index,
                detector: DetectorKind::PageHinkley,
                statistic: stat,
            }));
        }
        self.level = DriftLevel::Stable;
        Ok(None)
    }

    fn level(&self) -> DriftLevel {
        self.level
    }

    fn reset(&mut self) {
        self.weight = 0.0;
        self.mean = 0.0;
        self.cum = 0.0;
        self.min_cum = 0.0;
        self.n = 0;
        self.level = DriftLevel::Stable;
    }

    fn kind(&self) -> DetectorKind {
        DetectorKind::PageHinkley
    }

    fn samples_seen(&self) -> u64 {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent simulation of the published recurrence, kept free of the
    /// implementation above so it can serve as an oracle.
    fn oracle_first_alarm(values: &[f64], delta: f64, lambda: f64, alpha: f64) -> Option<usize> {
        let (mut weight, mut mean, mut cum, mut min_cum) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for (i, &x) in values.iter().enumerate() {
            weight = alpha * weight + 1.0;
            mean += (x - mean) / weight;
            cum += x - mean - delta;
            min_cum = min_cum.min(cum);
            if cum - min_cum >= lambda {
                return Some(i);
            }
        }
        None
    }

    #[test]
    fn all_zero_stream_never_alarms() {
        let mut pht = PageHinkley::new(PhtConfig::default());
        for i in 0..10_000u64 {
            assert!(pht.update(i, 0.0).unwrap().is_none());
        }
        assert_eq!(pht.samples_seen(), 10_000);
    }

    #[test]
    fn step_change_alarms_where_the_oracle_says() {
        let cfg = PhtConfig {
            delta: 0.005,
            lambda: 50.0,
            alpha: 1.0,
        };
        let values: Vec<f64> = (0..3_000)
            .map(|_| 0.0)
            .chain((0..500).map(|_| 1.0))
            .collect();
        let expected = oracle_first_alarm(&values, cfg.delta, cfg.lambda, cfg.alpha)
            .expect("oracle must alarm");
        // The shift is at sample 3000; the alarm must land within 120 steps.
        assert!((3_000..3_120).contains(&expected), "oracle at {expected}");

        let mut pht = PageHinkley::new(cfg);
        let mut fired = None;
        for (i, &v) in values.iter().enumerate() {
            if pht.update(i as u64, v).unwrap().is_some() {
                fired = Some(i);
                break;
            }
        }
        assert_eq!(fired, Some(expected));
    }

    #[test]
    fn alarm_resets_to_fresh_state() {
        let cfg = PhtConfig {
            delta: 0.005,
            lambda: 5.0,
            alpha: 1.0,
        };
        let mut pht = PageHinkley::new(cfg.clone());
        let mut i = 0u64;
        for _ in 0..200 {
            pht.update(i, 0.0).unwrap();
            i += 1;
        }
        loop {
            if pht.update(i, 1.0).unwrap().is_some() {
                break;
            }
            i += 1;
            assert!(i < 10_000, "alarm must fire after the step change");
        }
        // After the alarm the detector must behave exactly like a fresh one
        // fed the same subsequent values.
        let mut fresh = PageHinkley::new(cfg);
        for j in 0..200 {
            let v = if j < 100 { 0.0 } else { 0.9 };
            let a = pht.update(j, v).unwrap();
            let b = fresh.update(j, v).unwrap();
            assert_eq!(a, b);
            assert_eq!(pht.statistic(), fresh.statistic());
            assert_eq!(pht, fresh);
        }
    }

    #[test]
    fn reset_is_idempotent_and_preserves_parameters() {
        let cfg = PhtConfig {
            delta: 0.1,
            lambda: 9.0,
            alpha: 0.5,
        };
        let fresh = PageHinkley::new(cfg.clone());
        let mut a = PageHinkley::new(cfg.clone());
        a.reset();
        assert_eq!(a, fresh);
        for i in 0..1_000 {
            a.update(i, (i % 3) as f64 / 3.0).unwrap();
        }
        a.reset();
        assert_eq!(a, fresh);
        assert_eq!(a.config(), &cfg);
    }

    #[test]
    fn infinite_lambda_never_alarms() {
        let mut pht = PageHinkley::new(PhtConfig {
            lambda: f64::INFINITY,
            ..PhtConfig::default()
        });
        for i in 0..5_000u64 {
            let v = if i % 7 == 0 { 1.0 } else { 0.0 };
            assert!(pht.update(i, v).unwrap().is_none());
        }
    }

    #[test]
    fn constant_input_with_positive_delta_keeps_statistic_at_zero() {
        let mut pht = PageHinkley::new(PhtConfig::default());
        for i in 0..2_000u64 {
            pht.update(i, 0.42).unwrap();
            assert_eq!(pht.statistic(), 0.0);
        }
    }

    #[test]
    fn rejects_non_finite_input() {
        let mut pht = PageHinkley::new(PhtConfig::default());
        assert!(pht.update(0, f64::NAN).is_err());
        assert!(pht.update(0, f64::INFINITY).is_err());
    }

    #[test]
    fn identical_sequences_give_identical_alarms() {
        let values: Vec<f64> = (0..4_000)
            .map(|i| if (i / 500) % 2 == 0 { 0.1 } else { 0.6 })
            .collect();
        let run = |cfg: PhtConfig| -> Vec<u64> {
            let mut det = PageHinkley::new(cfg);
            let mut alarms = Vec::new();
            for (i, &v) in values.iter().enumerate() {
                if let Some(a) = det.update(i as u64, v).unwrap() {
                    alarms.push(a.index);
                }
            }
            alarms
        };
        let cfg = PhtConfig {
            delta: 0.005,
            lambda: 20.0,
            alpha: 0.999,
        };
        assert_eq!(run(cfg.clone()), run(cfg));
    }
}
