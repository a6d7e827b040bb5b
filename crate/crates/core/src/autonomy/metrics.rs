use serde::{Deserialize, Serialize};

use super::mission::MissionPhase;
use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingMetrics {
    /// m
    pub rmse: f64,
    pub samples: u64,
    /// Scenario start to the low-battery trigger, s.
    pub flight_time: f64,
}

/// One control iteration as seen by the metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingSample {
    pub phase: MissionPhase,
    /// |position - reference|, m.
    pub error: f64,
}

/// Running sum of squared tracking errors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RmseAccumulator {
    sum_sq: f64,
    count: u64,
}

impl RmseAccumulator {
    pub fn push(&mut self, error: f64) {
        self.sum_sq += error * error;
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn rmse(&self) -> Option<f64> {
        (self.count > 0).then(|| (self.sum_sq / self.count as f64).sqrt())
    }
}

/// RMSE over the TRACKING-phase control iterations.
pub fn compute_metrics<I>(samples: I, flight_time: f64) -> Result<TrackingMetrics, SimError>
where
    I: IntoIterator<Item = TrackingSample>,
{
    let mut acc = RmseAccumulator::default();
    for s in samples {
        if s.phase == MissionPhase::Tracking {
            acc.push(s.error);
        }
    }
    let rmse = acc.rmse().ok_or(SimError::EmptyMetrics)?;
    Ok(TrackingMetrics {
        rmse,
        samples: acc.count(),
        flight_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tracking(error: f64) -> TrackingSample {
        TrackingSample {
            phase: MissionPhase::Tracking,
            error,
        }
    }

    #[test]
    fn perfect_tracking() {
        let m = compute_metrics((0..100).map(|_| tracking(0.0)), 10.0).unwrap();
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.samples, 100);
    }

    #[test]
    fn constant_offset() {
        let m = compute_metrics((0..100).map(|_| tracking(0.1)), 10.0).unwrap();
        assert_relative_eq!(m.rmse, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn other_phases_ignored() {
        let samples = vec![
            tracking(0.3),
            TrackingSample {
                phase: MissionPhase::Approach,
                error: 5.0,
            },
            tracking(0.4),
        ];
        let m = compute_metrics(samples, 1.0).unwrap();
        assert_relative_eq!(m.rmse, (0.125f64).sqrt(), epsilon = 1e-12);
        assert_eq!(m.samples, 2);
    }

    #[test]
    fn empty_is_an_error() {
        let samples = vec![TrackingSample {
            phase: MissionPhase::Charging,
            error: 0.0,
        }];
        assert!(matches!(compute_metrics(samples, 0.0), Err(SimError::EmptyMetrics)));
    }
}
