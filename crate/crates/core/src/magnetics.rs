//! Connector magnetics: the force law between the station's EM-backed female
//! connector and the permanent-magnet head, the capture envelope it implies,
//! the calibration that fits the law to the observed pull distances, and the
//! breakaway rule used when un-docking.
//!
//! The force magnitude at separation `d` is `F0 * (d0 / (d0 + d))^n`. It is
//! finite at contact and decays monotonically, which lets a shared `(d0, n)`
//! reproduce the ratio of pull distances between two magnets from their
//! contact forces alone.

use serde::{Deserialize, Serialize};

use crate::dynamics::{HeadMode, TetherHeadState};
use crate::error::SimError;
use crate::math::{Vec3, GRAVITY};

/// Permanent magnet in the tether head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetSpec {
    pub name: String,
    /// kg
    pub mass: f64,
    /// Pull force at contact, N.
    pub contact_pull_force: f64,
}

impl MagnetSpec {
    /// Builds a spec from catalogue units (grams and gram-force).
    pub fn from_catalog(name: &str, mass_g: f64, pull_force_gf: f64) -> Self {
        MagnetSpec {
            name: name.to_string(),
            mass: mass_g / 1000.0,
            contact_pull_force: pull_force_gf * GRAVITY / 1000.0,
        }
    }

    /// Small neodymium magnet.
    pub fn neod_s() -> Self {
        Self::from_catalog("NeodS", 0.42, 771.11)
    }

    /// Medium ceramic magnet.
    pub fn cera_m() -> Self {
        Self::from_catalog("CeraM", 17.5, 2721.55)
    }

    /// Large ceramic magnet.
    pub fn cera_l() -> Self {
        Self::from_catalog("CeraL", 34.7, 4989.52)
    }

    pub fn catalog() -> Vec<MagnetSpec> {
        vec![Self::neod_s(), Self::cera_m(), Self::cera_l()]
    }

    pub fn by_name(name: &str) -> Option<MagnetSpec> {
        Self::catalog().into_iter().find(|m| m.name.eq_ignore_ascii_case(name))
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.mass > 0.0) {
            return Err(format!("magnet mass must be positive, got {}", self.mass));
        }
        if !(self.contact_pull_force > 0.0) {
            return Err("contact_pull_force must be positive".into());
        }
        Ok(())
    }
}

/// Calibrated force law for one magnet paired with the station EM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmFieldModel {
    pub name: String,
    /// Combined EM + magnet force at contact, N.
    pub contact_force: f64,
    /// Decay length scale, m.
    pub decay_length: f64,
    /// Decay exponent.
    pub exponent: f64,
    /// Minimum pull that snaps a hanging head in, N.
    pub capture_threshold: f64,
    /// Permanent-magnet hold with the EM off, N.
    pub residual_hold_force: f64,
}

impl EmFieldModel {
    pub fn force_at(&self, separation: f64) -> f64 {
        let d = separation.max(0.0);
        self.contact_force * (self.decay_length / (self.decay_length + d)).powf(self.exponent)
    }

    pub fn validate(&self, magnet: Option<&MagnetSpec>) -> Result<(), String> {
        if !(self.decay_length > 0.0) || !(self.exponent > 0.0) {
            return Err("decay length and exponent must be positive".into());
        }
        if let Some(m) = magnet {
            if self.contact_force < m.contact_pull_force {
                return Err(format!(
                    "contact force {:.3} N below the magnet's own pull {:.3} N",
                    self.contact_force, m.contact_pull_force
                ));
            }
        }
        if !(self.residual_hold_force > 0.0 && self.residual_hold_force < self.contact_force) {
            return Err("residual hold force must lie in (0, contact force)".into());
        }
        Ok(())
    }
}

/// Force on the head, directed from the head toward the connector.
///
/// With the EM off the field term is zero; holding a docked head is left to
/// [`breakaway_check`].
pub fn magnetic_force(head_pos: &Vec3, station_pos: &Vec3, model: &EmFieldModel, em_active: bool) -> Vec3 {
    if !em_active {
        return Vec3::zeros();
    }
    let delta = station_pos - head_pos;
    let d = delta.norm();
    if d == 0.0 {
        return Vec3::zeros();
    }
    delta * (model.force_at(d) / d)
}

/// Largest separation at which the pull still reaches the capture threshold.
pub fn capture_radius(model: &EmFieldModel) -> f64 {
    if model.capture_threshold >= model.contact_force {
        return 0.0;
    }
    let ratio = model.contact_force / model.capture_threshold;
    model.decay_length * (ratio.ln() / model.exponent).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    /// Wanted capture-radius ratio, strongest magnet over weakest.
    pub target_ratio: f64,
    /// Capture radius of the weakest magnet, m.
    pub baseline_radius: f64,
    pub capture_threshold: f64,
    /// Multiplier the energised EM applies to the head magnet's contact pull.
    pub em_boost: f64,
    pub residual_hold_force: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        CalibrationTargets {
            target_ratio: 5.0,
            baseline_radius: 0.01,
            capture_threshold: 1.0,
            em_boost: 2.0,
            residual_hold_force: 2.0,
        }
    }
}

/// Exponent used when the targets do not constrain it.
pub const DEFAULT_EXPONENT: f64 = 2.0;

/// `ln(exp(y) - 1)` without overflow for large `y`.
fn ln_expm1(y: f64) -> f64 {
    if y > 30.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

/// Fits a shared `(d0, n, capture_threshold)` so the weakest magnet captures
/// at `baseline_radius` and the strongest at `target_ratio` times that.
///
/// The radius ratio falls monotonically in `n`, from unbounded as `n -> 0`
/// to `ln(F_strong/θ) / ln(F_weak/θ)` as `n -> ∞`, so a bisection on `ln n`
/// finds the unique exponent; `d0` then follows from the baseline radius.
pub fn calibrate_field(specs: &[MagnetSpec], targets: &CalibrationTargets) -> Result<Vec<EmFieldModel>, SimError> {
    if specs.is_empty() {
        return Err(SimError::invalid("specs", "at least one magnet is required"));
    }
    let fail = |reason: &str, residual: f64| SimError::Calibration {
        reason: reason.to_string(),
        residual,
    };
    if !(targets.baseline_radius > 0.0) {
        return Err(fail("baseline radius must be positive", targets.baseline_radius));
    }
    if !(targets.em_boost >= 1.0) {
        return Err(fail("EM boost must be at least 1", targets.em_boost - 1.0));
    }
    for s in specs {
        s.validate().map_err(|e| fail(&e, 0.0))?;
    }

    let contact = |s: &MagnetSpec| targets.em_boost * s.contact_pull_force;
    let weakest = specs.iter().map(contact).fold(f64::INFINITY, f64::min);
    let strongest = specs.iter().map(contact).fold(0.0, f64::max);
    let threshold = targets.capture_threshold;
    if !(threshold > 0.0 && threshold < weakest) {
        return Err(fail(
            "capture threshold must lie below the weakest contact force",
            threshold - weakest,
        ));
    }

    let a = (strongest / threshold).ln();
    let b = (weakest / threshold).ln();
    let same_strength = (a - b).abs() <= 1e-12 * a.abs();
    let exponent = if same_strength {
        if (targets.target_ratio - 1.0).abs() > 1e-9 {
            return Err(fail(
                "identical magnets cannot produce a radius ratio other than 1",
                targets.target_ratio - 1.0,
            ));
        }
        DEFAULT_EXPONENT
    } else {
        if !(targets.target_ratio > 1.0) {
            return Err(fail("target ratio must exceed 1", targets.target_ratio - 1.0));
        }
        let floor = a / b;
        if targets.target_ratio <= floor {
            return Err(fail(
                "target ratio unreachable; the law's minimum ratio for these forces is higher",
                floor - targets.target_ratio,
            ));
        }
        let log_target = targets.target_ratio.ln();
        let residual = |n: f64| ln_expm1(a / n) - ln_expm1(b / n) - log_target;
        let (mut lo, mut hi) = (1e-4f64.ln(), 1e4f64.ln());
        if residual(hi.exp()) > 0.0 {
            return Err(fail("exponent root lies beyond the search bracket", residual(hi.exp())));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if residual(mid.exp()) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).exp()
    };

    let decay_length = targets.baseline_radius / (b / exponent).exp_m1();
    let models: Vec<EmFieldModel> = specs
        .iter()
        .map(|s| EmFieldModel {
            name: s.name.clone(),
            contact_force: contact(s),
            decay_length,
            exponent,
            capture_threshold: threshold,
            residual_hold_force: targets.residual_hold_force,
        })
        .collect();

    let radius = |f: f64| decay_length * ((f / threshold).ln() / exponent).exp_m1();
    let achieved = radius(strongest) / radius(weakest);
    let rel = (achieved - targets.target_ratio).abs() / targets.target_ratio;
    if rel > 0.05 {
        return Err(fail("calibrated ratio outside 5% of target", rel));
    }
    for m in &models {
        m.validate(None).map_err(|e| fail(&e, 0.0))?;
    }
    Ok(models)
}

/// Marks a free head as captured when the energised field can reach it.
pub fn try_capture(
    head: &TetherHeadState,
    station_pos: &Vec3,
    model: &EmFieldModel,
    em_active: bool,
) -> TetherHeadState {
    let mut next = head.clone();
    if em_active && head.mode.is_free() && (head.position - station_pos).norm() <= capture_radius(model) {
        next.mode = HeadMode::Captured;
    }
    next
}

/// True when cable tension tears a docked head off the connector.
///
/// With the EM off only the permanent-magnet residual holds the head; with
/// the EM on the full contact force does.
pub fn breakaway_check(head_mode: HeadMode, tension: f64, model: &EmFieldModel, em_active: bool) -> bool {
    if head_mode != HeadMode::Docked {
        return false;
    }
    let hold = if em_active {
        model.contact_force
    } else {
        model.residual_hold_force
    };
    tension > hold
}
