use serde::{Deserialize, Serialize};

/// Fixed-step simulation clock. Time is always derived from the tick count so
/// long runs do not accumulate rounding from repeated addition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimClock {
    pub dt: f64,
    pub tick: u64,
}

impl SimClock {
    pub fn new(dt: f64) -> Self {
        assert!(dt > 0.0 && dt.is_finite(), "dt must be positive");
        SimClock { dt, tick: 0 }
    }

    pub fn t(&self) -> f64 {
        self.tick as f64 * self.dt
    }

    pub fn advance(&mut self) {
        self.tick += 1;
    }

    /// Number of physics ticks per period of a `rate` Hz task, at least one.
    pub fn decimation(&self, rate: f64) -> u64 {
        ((1.0 / (rate * self.dt)).round() as u64).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_from_ticks() {
        let mut c = SimClock::new(0.001);
        c.advance();
        assert_eq!(c.t(), 0.001);
        for _ in 1..1000 {
            c.advance();
        }
        assert_eq!(c.tick, 1000);
        assert_eq!(c.t(), 1.0);
    }

    #[test]
    fn rates_decimate_the_step() {
        let c = SimClock::new(0.001);
        assert_eq!(c.decimation(500.0), 2);
        assert_eq!(c.decimation(100.0), 10);
        assert_eq!(c.decimation(5000.0), 1);
    }
}
