use serde::{Deserialize, Serialize};

use crate::autonomy::{ControllerGains, MissionConfig, TrackingPlan};
use crate::dynamics::{GroundContact, TetherConfig, VehicleSpec};
use crate::error::SimError;
use crate::magnetics::{capture_radius, EmFieldModel};
use crate::math::Vec3;
use crate::power::{BatterySpec, ChargerSpec, PowerModel};
use crate::sim::EstimatorConfig;
use crate::station::StationSpec;

/// How a run begins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StartMode {
    /// In flight on the tracking plan, already at its reference state.
    Tracking,
    /// Hovering over the station waiting for the head to dock. With
    /// `head_offset` the vehicle is placed so the hanging head sits at that
    /// offset from the connector; otherwise at the pre-dock point.
    DockWait { head_offset: Option<Vec3> },
}

/// Fully resolved, SI-unit scenario that a [`crate::Simulation`] runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    /// Tether variant label used in reports (`Def` for no tether).
    pub variant: String,
    pub seed: u64,
    pub dt: f64,
    /// Hz
    pub control_rate: f64,
    /// Time-series sampling period, s; `None` disables the log.
    pub log_interval: Option<f64>,
    pub vehicle: VehicleSpec,
    pub battery: BatterySpec,
    pub initial_soc: f64,
    /// °C
    pub ambient_temperature: f64,
    pub tether: Option<TetherConfig>,
    pub field: Option<EmFieldModel>,
    pub station: StationSpec,
    pub charger: ChargerSpec,
    pub power: PowerModel,
    pub mission: MissionConfig,
    pub plan: TrackingPlan,
    pub start: StartMode,
    pub gains: ControllerGains,
    pub noise: EstimatorConfig,
    pub ground: GroundContact,
    /// Longest time the mission may stay in one phase, s.
    pub watchdog: f64,
    /// Forces the EM state regardless of the station FSM (bench testing).
    pub em_override: Option<bool>,
}

impl Scenario {
    /// Airframe as integrated: the vehicle carries half of the wire.
    pub fn dynamics_vehicle(&self) -> VehicleSpec {
        let mut v = self.vehicle.clone();
        if let Some(t) = &self.tether {
            v.mass += t.vehicle_side_mass();
        }
        v
    }

    /// Mass the controller compensates for: airframe plus the whole tether.
    pub fn controller_mass(&self) -> f64 {
        self.vehicle.mass
            + self
                .tether
                .as_ref()
                .map_or(0.0, |t| t.vehicle_side_mass() + t.head_mass)
    }

    pub fn capture_radius(&self) -> f64 {
        self.field.as_ref().map_or(0.0, capture_radius)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let check = |name: &str, r: Result<(), String>| r.map_err(|e| SimError::invalid(name, e));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::invalid("dt", "must be positive"));
        }
        if !(self.control_rate > 0.0) || self.control_rate * self.dt > 1.0 + 1e-9 {
            return Err(SimError::invalid("control_rate", "must be positive and at most 1/dt"));
        }
        if let Some(l) = self.log_interval {
            if !(l >= self.dt) {
                return Err(SimError::invalid("log_interval", "must be at least dt"));
            }
        }
        check("vehicle", self.vehicle.validate())?;
        check("battery", self.battery.validate())?;
        if !(0.0..=1.0).contains(&self.initial_soc) {
            return Err(SimError::invalid("initial_soc", "must lie in [0, 1]"));
        }
        if let Some(t) = &self.tether {
            check("tether", t.validate())?;
            if self.dynamics_vehicle().max_total_thrust <= self.controller_mass() * crate::GRAVITY {
                return Err(SimError::invalid("tether", "vehicle cannot hover with this tether"));
            }
        }
        if let Some(f) = &self.field {
            check("field", f.validate(self.tether.as_ref().map(|t| &t.magnet)))?;
        }
        check("station", self.station.validate())?;
        check("charger", self.charger.validate())?;
        let cutoff = self.charger.cutoff_current(&self.battery);
        if self.station.current_threshold >= cutoff {
            return Err(SimError::invalid(
                "station.current_threshold",
                format!(
                    "{:.4} A must stay below the charger cutoff {:.4} A, or the EM re-arms while the pack is still connected",
                    self.station.current_threshold, cutoff
                ),
            ));
        }
        if let (Some(t), Some(_)) = (&self.tether, &self.field) {
            check(
                "station.rearm_delay",
                self.station
                    .validate_rearm(t.length, self.capture_radius(), self.mission.climb_speed),
            )?;
        }
        check("mission", self.mission.validate())?;
        check("noise", self.noise.validate())?;
        if !(self.watchdog > 0.0) {
            return Err(SimError::invalid("watchdog", "must be positive"));
        }
        if let StartMode::DockWait { .. } = self.start {
            if self.tether.is_none() || self.field.is_none() {
                return Err(SimError::invalid("start", "docking needs a tether and a field model"));
            }
        }
        if self.power.idle_power < 0.0 || self.power.induced_coeff < 0.0 {
            return Err(SimError::invalid("power", "coefficients must be non-negative"));
        }
        Ok(())
    }
}
