use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::math::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseProfile {
    None,
    Indoor,
    Outdoor,
}

impl NoiseProfile {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseProfile::None => "none",
            NoiseProfile::Indoor => "indoor",
            NoiseProfile::Outdoor => "outdoor",
        }
    }
}

/// Idealised state estimator: truth plus white Gaussian noise, sampled at a
/// fixed rate and predicted at constant velocity in between. Optional Ornstein-Uhlenbeck wind gusts
/// act on the vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub profile: NoiseProfile,
    /// Hz
    pub rate: f64,
    /// m
    pub position_sigma: f64,
    /// m/s
    pub velocity_sigma: f64,
    /// Stationary standard deviation of the gust force, N.
    pub gust_sigma: f64,
    /// s
    pub gust_time_constant: f64,
}

impl EstimatorConfig {
    pub fn profile(profile: NoiseProfile, rate: f64) -> Self {
        let (p, v, g) = match profile {
            NoiseProfile::None => (0.0, 0.0, 0.0),
            NoiseProfile::Indoor => (0.002, 0.01, 0.0),
            NoiseProfile::Outdoor => (0.02, 0.05, 0.05),
        };
        EstimatorConfig {
            profile,
            rate,
            position_sigma: p,
            velocity_sigma: v,
            gust_sigma: g,
            gust_time_constant: 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.rate > 0.0) {
            return Err("estimate rate must be positive".into());
        }
        if self.position_sigma < 0.0 || self.velocity_sigma < 0.0 || self.gust_sigma < 0.0 {
            return Err("noise standard deviations must be non-negative".into());
        }
        if !(self.gust_time_constant > 0.0) {
            return Err("gust time constant must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub position: Vec3,
    pub velocity: Vec3,
}

#[derive(Debug, Clone)]
pub struct Estimator {
    cfg: EstimatorConfig,
    rng: ChaCha8Rng,
    pub estimate: Estimate,
    pub gust: Vec3,
}

impl Estimator {
    /// Noise draws come from their own ChaCha stream of the run seed.
    pub fn new(cfg: EstimatorConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        Estimator {
            cfg,
            rng,
            estimate: Estimate {
                position: Vec3::zeros(),
                velocity: Vec3::zeros(),
            },
            gust: Vec3::zeros(),
        }
    }

    fn normal3(&mut self) -> Vec3 {
        let mut n = || -> f64 { StandardNormal.sample(&mut self.rng) };
        Vec3::new(n(), n(), n())
    }

    /// Takes a new sample of the true state and advances the gust process
    /// by one estimator period.
    pub fn sample(&mut self, position: &Vec3, velocity: &Vec3) {
        let mut p = *position;
        let mut v = *velocity;
        if self.cfg.position_sigma > 0.0 {
            p += self.normal3() * self.cfg.position_sigma;
        }
        if self.cfg.velocity_sigma > 0.0 {
            v += self.normal3() * self.cfg.velocity_sigma;
        }
        self.estimate = Estimate {
            position: p,
            velocity: v,
        };

        if self.cfg.gust_sigma > 0.0 {
            let h = 1.0 / self.cfg.rate;
            let decay = (-h / self.cfg.gust_time_constant).exp();
            let spread = self.cfg.gust_sigma * (1.0 - decay * decay).sqrt();
            let n = self.normal3();
            self.gust = self.gust * decay + n * spread;
        }
    }
}

impl Estimator {
    /// Dead-reckons the estimate forward between samples.
    pub fn predict(&mut self, dt: f64) {
        self.estimate.position += self.estimate.velocity * dt;
    }
}
