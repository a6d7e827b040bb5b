//! On-disk scenario format.
//!
//! Every numeric key carries its unit as a suffix (`mass_g`, `length_m`,
//! `capacity_mah`, ...). Omitted keys take the SD2S circle defaults below;
//! a top-level `preset = "<name>"` starts from a shipped preset instead.

use serde::{Deserialize, Serialize};

use super::model::{Scenario, StartMode};
use crate::autonomy::{
    ApproachTrigger, CircleTrajectory, ControllerGains, MissionConfig, TakeoffTrigger, TrackingPlan,
};
use crate::dynamics::{GroundContact, TetherConfig, VehicleSpec};
use crate::error::{ConfigError, SimError};
use crate::magnetics::{calibrate_field, CalibrationTargets, EmFieldModel, MagnetSpec};
use crate::math::{Vec3, GRAVITY};
use crate::power::{calibrate_power_model, BatterySpec, CalibrationFlight, ChargerSpec, PowerModel};
use crate::sim::{EstimatorConfig, NoiseProfile};
use crate::station::StationSpec;

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopCondition {
    /// End the run at the first LOW_BATTERY event.
    LowBattery,
    /// Run for the full duration.
    Never,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub name: String,
    pub seed: u64,
    pub dt_s: f64,
    pub control_rate_hz: f64,
    /// 0 disables the time-series log.
    pub log_interval_s: f64,
    pub duration_s: f64,
    pub stop: StopCondition,
    pub watchdog_s: f64,
    pub ambient_temperature_degc: f64,
    pub noise: NoiseProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub em_override: Option<bool>,
    pub vehicle: VehicleSection,
    pub battery: BatterySection,
    pub power: PowerSection,
    pub tether: TetherSection,
    pub magnetics: MagneticsSection,
    pub station: StationSection,
    pub charger: ChargerSection,
    pub controller: ControllerSection,
    pub trajectory: TrajectorySection,
    pub mission: MissionSection,
    pub ground: GroundSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            preset: None,
            name: "sd2s_def_circle".into(),
            seed: 1,
            dt_s: 0.001,
            control_rate_hz: 500.0,
            log_interval_s: 0.1,
            duration_s: 600.0,
            stop: StopCondition::LowBattery,
            watchdog_s: 14_400.0,
            ambient_temperature_degc: 25.0,
            noise: NoiseProfile::Indoor,
            em_override: None,
            vehicle: VehicleSection::default(),
            battery: BatterySection::default(),
            power: PowerSection::default(),
            tether: TetherSection::default(),
            magnetics: MagneticsSection::default(),
            station: StationSection::default(),
            charger: ChargerSection::default(),
            controller: ControllerSection::default(),
            trajectory: TrajectorySection::default(),
            mission: MissionSection::default(),
            ground: GroundSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleSection {
    pub name: String,
    /// Including the battery.
    pub mass_g: f64,
    pub inertia_kg_m2: [f64; 3],
    pub max_total_thrust_n: f64,
    pub arm_length_m: f64,
    pub yaw_moment_ratio_m: f64,
    pub attach_point_m: [f64; 3],
    pub ground_clearance_m: f64,
    pub estimate_rate_hz: f64,
}

impl Default for VehicleSection {
    fn default() -> Self {
        VehicleSection {
            name: "SD2S".into(),
            mass_g: 250.0,
            inertia_kg_m2: [3.0e-4, 3.0e-4, 5.0e-4],
            max_total_thrust_n: 6.13,
            arm_length_m: 0.08,
            yaw_moment_ratio_m: 0.016,
            attach_point_m: [0.0, 0.0, -0.03],
            ground_clearance_m: 0.05,
            estimate_rate_hz: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatterySection {
    pub cells: u32,
    pub capacity_mah: f64,
    pub mass_g: f64,
    pub full_voltage_v: f64,
    pub empty_voltage_per_cell_v: f64,
    pub internal_resistance_ohm: f64,
    pub heat_capacity_j_per_k: f64,
    pub cooling_time_constant_s: f64,
    pub initial_soc_frac: f64,
}

impl Default for BatterySection {
    fn default() -> Self {
        BatterySection {
            cells: 2,
            capacity_mah: 910.0,
            mass_g: 47.0,
            full_voltage_v: 7.4,
            empty_voltage_per_cell_v: 3.3,
            internal_resistance_ohm: 0.03,
            heat_capacity_j_per_k: 45.0,
            cooling_time_constant_s: 600.0,
            initial_soc_frac: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    pub idle_power_w: f64,
    /// Rotor coefficient; calibrated from the baseline flight time if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub induced_coeff_w_per_n1_5: Option<f64>,
    /// Endurance of the tetherless airframe on the calibration circle.
    pub baseline_flight_time_s: f64,
    pub calibration_radius_m: f64,
    pub calibration_speed_mps: f64,
}

impl Default for PowerSection {
    fn default() -> Self {
        PowerSection {
            idle_power_w: 38.0,
            induced_coeff_w_per_n1_5: None,
            baseline_flight_time_s: 360.0,
            calibration_radius_m: 1.0,
            calibration_speed_mps: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TetherSection {
    pub enabled: bool,
    /// Catalogue name: NeodS, CeraM or CeraL.
    pub magnet: String,
    pub length_m: f64,
    pub linear_mass_density_kg_per_m: f64,
    /// Head enclosure and pogo pins.
    pub enclosure_mass_g: f64,
    pub stiffness_n_per_m: f64,
    pub damping_ns_per_m: f64,
    pub head_drag_ns_per_m: f64,
}

impl Default for TetherSection {
    fn default() -> Self {
        TetherSection {
            enabled: false,
            magnet: "NeodS".into(),
            length_m: 0.5,
            linear_mass_density_kg_per_m: 0.033,
            enclosure_mass_g: 1.0,
            stiffness_n_per_m: 2000.0,
            damping_ns_per_m: 5.0,
            head_drag_ns_per_m: 0.002,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MagneticsSection {
    pub target_ratio: f64,
    pub baseline_radius_m: f64,
    pub capture_threshold_n: f64,
    pub em_boost_ratio: f64,
    pub residual_hold_force_n: f64,
}

impl Default for MagneticsSection {
    fn default() -> Self {
        let d = CalibrationTargets::default();
        MagneticsSection {
            target_ratio: d.target_ratio,
            baseline_radius_m: d.baseline_radius,
            capture_threshold_n: d.capture_threshold,
            em_boost_ratio: d.em_boost,
            residual_hold_force_n: d.residual_hold_force,
        }
    }
}

impl MagneticsSection {
    pub fn targets(&self) -> CalibrationTargets {
        CalibrationTargets {
            target_ratio: self.target_ratio,
            baseline_radius: self.baseline_radius_m,
            capture_threshold: self.capture_threshold_n,
            em_boost: self.em_boost_ratio,
            residual_hold_force: self.residual_hold_force_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationSection {
    pub connector_position_m: [f64; 3],
    pub current_threshold_a: f64,
    pub rearm_delay_s: f64,
    pub mass_kg: f64,
    pub dimensions_m: [f64; 3],
    pub contact_tolerance_m: f64,
}

impl Default for StationSection {
    fn default() -> Self {
        StationSection {
            connector_position_m: [3.0, 0.0, 0.06],
            current_threshold_a: 0.03,
            rearm_delay_s: 3.0,
            mass_kg: 0.56,
            dimensions_m: [0.15, 0.10, 0.06],
            contact_tolerance_m: 0.002,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChargerSection {
    pub set_current_c: f64,
    pub cutoff_current_c: f64,
    pub protect_temperature_degc: f64,
    pub resume_temperature_degc: f64,
    pub throttle_factor_ratio: f64,
    pub fast_rise_k_per_a2: f64,
    pub fast_time_constant_s: f64,
    pub slow_rise_k_per_a2: f64,
    pub slow_time_constant_s: f64,
    pub start_delay_s: f64,
}

impl Default for ChargerSection {
    fn default() -> Self {
        let d = ChargerSpec::default();
        ChargerSection {
            set_current_c: d.c_rate,
            cutoff_current_c: d.cutoff_c_rate,
            protect_temperature_degc: d.protect_temperature,
            resume_temperature_degc: d.resume_temperature,
            throttle_factor_ratio: d.throttle_factor,
            fast_rise_k_per_a2: d.fast_rise_per_a2,
            fast_time_constant_s: d.fast_time_constant,
            slow_rise_k_per_a2: d.slow_rise_per_a2,
            slow_time_constant_s: d.slow_time_constant,
            start_delay_s: d.start_delay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSection {
    pub position_gain_per_s2: f64,
    pub velocity_gain_per_s: f64,
    pub attitude_bandwidth_rad_per_s: f64,
    pub attitude_damping_ratio: f64,
    pub max_tilt_deg: f64,
}

impl Default for ControllerSection {
    fn default() -> Self {
        let g = ControllerGains::default();
        ControllerSection {
            position_gain_per_s2: g.position,
            velocity_gain_per_s: g.velocity,
            attitude_bandwidth_rad_per_s: g.attitude_bandwidth,
            attitude_damping_ratio: g.attitude_damping,
            max_tilt_deg: g.max_tilt.to_degrees(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Circle,
    RandomLegs,
    Hover,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub kind: TrajectoryKind,
    pub center_m: [f64; 2],
    pub radius_m: f64,
    pub speed_mps: f64,
    pub altitude_m: f64,
    pub box_min_m: [f64; 3],
    pub box_max_m: [f64; 3],
    pub leg_speed_mps: f64,
    pub leg_accel_mps2: f64,
    pub hover_point_m: [f64; 3],
}

impl Default for TrajectorySection {
    fn default() -> Self {
        TrajectorySection {
            kind: TrajectoryKind::Circle,
            center_m: [0.0, 0.0],
            radius_m: 1.0,
            speed_mps: 2.0,
            altitude_m: 1.0,
            box_min_m: [-1.5, -1.5, 0.9],
            box_max_m: [1.5, 1.5, 1.6],
            leg_speed_mps: 2.0,
            leg_accel_mps2: 2.0,
            hover_point_m: [0.0, 0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Tracking,
    DockWait,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproachKind {
    LowBattery,
    Timer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TakeoffKind {
    ChargeComplete,
    Dwell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionSection {
    pub start: StartKind,
    /// Head position relative to the connector for a dock-wait start.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub head_offset_m: Option<[f64; 3]>,
    pub low_battery_v: f64,
    pub low_battery_debounce_s: f64,
    pub approach_trigger: ApproachKind,
    pub approach_after_s: f64,
    pub takeoff_trigger: TakeoffKind,
    pub dwell_s: f64,
    pub travel_speed_mps: f64,
    pub travel_accel_mps2: f64,
    pub cruise_altitude_m: f64,
    pub dock_clearance_m: f64,
    pub dock_overshoot_m: f64,
    pub settle_time_s: f64,
    pub descent_speed_mps: f64,
    pub dock_timeout_s: f64,
    pub retry_offset_m: f64,
    pub landing_height_m: f64,
    pub landing_offset_m: [f64; 2],
    pub landing_speed_mps: f64,
    pub climb_speed_mps: f64,
    pub takeoff_climb_m: f64,
    pub charge_confirm_time_s: f64,
    pub yaw_deg: f64,
}

impl Default for MissionSection {
    fn default() -> Self {
        let m = MissionConfig::default();
        MissionSection {
            start: StartKind::Tracking,
            head_offset_m: None,
            low_battery_v: m.low_battery_voltage,
            low_battery_debounce_s: m.low_battery_debounce,
            approach_trigger: ApproachKind::LowBattery,
            approach_after_s: 5.0,
            takeoff_trigger: TakeoffKind::ChargeComplete,
            dwell_s: 5.0,
            travel_speed_mps: m.travel_speed,
            travel_accel_mps2: m.travel_accel,
            cruise_altitude_m: m.cruise_altitude,
            dock_clearance_m: m.dock_clearance,
            dock_overshoot_m: m.dock_overshoot,
            settle_time_s: m.settle_time,
            descent_speed_mps: m.descent_speed,
            dock_timeout_s: m.dock_timeout,
            retry_offset_m: m.retry_offset,
            landing_height_m: m.landing_height,
            landing_offset_m: [m.landing_offset.x, m.landing_offset.y],
            landing_speed_mps: m.landing_speed,
            climb_speed_mps: m.climb_speed,
            takeoff_climb_m: m.takeoff_climb,
            charge_confirm_time_s: m.charge_confirm_time,
            yaw_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundSection {
    pub enabled: bool,
    pub pad_center_m: [f64; 3],
    pub pad_radius_m: f64,
    pub penalty_stiffness_n_per_m: f64,
    pub penalty_damping_ns_per_m: f64,
}

impl Default for GroundSection {
    fn default() -> Self {
        let g = GroundContact::default();
        GroundSection {
            enabled: g.enabled,
            pad_center_m: [g.pad_center.x, g.pad_center.y, g.pad_center.z],
            pad_radius_m: g.pad_radius,
            penalty_stiffness_n_per_m: g.penalty_stiffness,
            penalty_damping_ns_per_m: g.penalty_damping,
        }
    }
}

/// Sanity checks that can be pinned to a single key.
fn check_fields(c: &ScenarioConfig) -> Result<(), ConfigError> {
    let positive: [(&str, f64); 20] = [
        ("dt_s", c.dt_s),
        ("control_rate_hz", c.control_rate_hz),
        ("duration_s", c.duration_s),
        ("watchdog_s", c.watchdog_s),
        ("vehicle.mass_g", c.vehicle.mass_g),
        ("vehicle.max_total_thrust_n", c.vehicle.max_total_thrust_n),
        ("vehicle.arm_length_m", c.vehicle.arm_length_m),
        ("vehicle.estimate_rate_hz", c.vehicle.estimate_rate_hz),
        ("battery.capacity_mah", c.battery.capacity_mah),
        ("battery.mass_g", c.battery.mass_g),
        ("battery.full_voltage_v", c.battery.full_voltage_v),
        ("battery.internal_resistance_ohm", c.battery.internal_resistance_ohm),
        ("power.baseline_flight_time_s", c.power.baseline_flight_time_s),
        ("tether.length_m", c.tether.length_m),
        ("tether.stiffness_n_per_m", c.tether.stiffness_n_per_m),
        ("magnetics.baseline_radius_m", c.magnetics.baseline_radius_m),
        ("magnetics.capture_threshold_n", c.magnetics.capture_threshold_n),
        ("station.current_threshold_a", c.station.current_threshold_a),
        ("station.rearm_delay_s", c.station.rearm_delay_s),
        ("station.contact_tolerance_m", c.station.contact_tolerance_m),
    ];
    for (key, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ConfigError::new(key, format!("must be positive, got {v}")));
        }
    }
    let non_negative = [
        ("log_interval_s", c.log_interval_s),
        ("power.idle_power_w", c.power.idle_power_w),
        (
            "tether.linear_mass_density_kg_per_m",
            c.tether.linear_mass_density_kg_per_m,
        ),
        ("tether.enclosure_mass_g", c.tether.enclosure_mass_g),
        ("tether.damping_ns_per_m", c.tether.damping_ns_per_m),
        ("tether.head_drag_ns_per_m", c.tether.head_drag_ns_per_m),
    ];
    for (key, v) in non_negative {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(ConfigError::new(key, format!("must be non-negative, got {v}")));
        }
    }
    // TOML integers are signed 64-bit; larger seeds could not be echoed back.
    if c.seed > i64::MAX as u64 {
        return Err(ConfigError::new("seed", format!("must be at most {}", i64::MAX)));
    }
    if c.vehicle.inertia_kg_m2.iter().any(|j| !(*j > 0.0)) {
        return Err(ConfigError::new("vehicle.inertia_kg_m2", "entries must be positive"));
    }
    if !(1..=4).contains(&c.battery.cells) {
        return Err(ConfigError::new(
            "battery.cells",
            format!("must be between 1 and 4, got {}", c.battery.cells),
        ));
    }
    if !(0.0..=1.0).contains(&c.battery.initial_soc_frac) {
        return Err(ConfigError::new("battery.initial_soc_frac", "must lie in [0, 1]"));
    }
    if c.tether.enabled && MagnetSpec::by_name(&c.tether.magnet).is_none() {
        return Err(ConfigError::new(
            "tether.magnet",
            format!("unknown magnet `{}` (expected NeodS, CeraM or CeraL)", c.tether.magnet),
        ));
    }
    if c.vehicle.attach_point_m[2] >= 0.0 {
        return Err(ConfigError::new(
            "vehicle.attach_point_m",
            "must hang below the frame (negative z)",
        ));
    }
    if let Some(off) = c.mission.head_offset_m {
        if c.mission.start != StartKind::DockWait {
            return Err(ConfigError::new(
                "mission.head_offset_m",
                "only meaningful with start = \"dock_wait\"",
            ));
        }
        if off.iter().any(|x| !x.is_finite()) {
            return Err(ConfigError::new("mission.head_offset_m", "must be finite"));
        }
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn check(&self) -> Result<(), ConfigError> {
        check_fields(self)
    }

    /// Switches the tether to one of the report variants: `Def` (none) or a
    /// catalogue magnet name.
    pub fn apply_variant(&mut self, variant: &str) -> Result<(), ConfigError> {
        if variant.eq_ignore_ascii_case("def") {
            self.tether.enabled = false;
            return Ok(());
        }
        let m = MagnetSpec::by_name(variant)
            .ok_or_else(|| ConfigError::new("variant", format!("unknown variant `{variant}`")))?;
        self.tether.enabled = true;
        self.tether.magnet = m.name;
        Ok(())
    }

    pub fn variant(&self) -> String {
        if self.tether.enabled {
            MagnetSpec::by_name(&self.tether.magnet).map_or_else(|| self.tether.magnet.clone(), |m| m.name)
        } else {
            "Def".into()
        }
    }

    pub fn vehicle_spec(&self) -> VehicleSpec {
        let v = &self.vehicle;
        VehicleSpec {
            name: v.name.clone(),
            mass: v.mass_g / 1000.0,
            inertia: v3(v.inertia_kg_m2),
            max_total_thrust: v.max_total_thrust_n,
            arm_length: v.arm_length_m,
            yaw_moment_ratio: v.yaw_moment_ratio_m,
            attach_point: v3(v.attach_point_m),
            ground_clearance: v.ground_clearance_m,
            estimate_rate: v.estimate_rate_hz,
        }
    }

    pub fn battery_spec(&self) -> BatterySpec {
        let b = &self.battery;
        BatterySpec {
            cells: b.cells,
            capacity: b.capacity_mah / 1000.0,
            mass: b.mass_g / 1000.0,
            full_voltage: b.full_voltage_v,
            empty_voltage_per_cell: b.empty_voltage_per_cell_v,
            internal_resistance: b.internal_resistance_ohm,
            heat_capacity: b.heat_capacity_j_per_k,
            cooling_time_constant: b.cooling_time_constant_s,
        }
    }

    pub fn charger_spec(&self) -> ChargerSpec {
        let c = &self.charger;
        ChargerSpec {
            c_rate: c.set_current_c,
            cutoff_c_rate: c.cutoff_current_c,
            protect_temperature: c.protect_temperature_degc,
            resume_temperature: c.resume_temperature_degc,
            ambient_temperature: self.ambient_temperature_degc,
            throttle_factor: c.throttle_factor_ratio,
            fast_rise_per_a2: c.fast_rise_k_per_a2,
            fast_time_constant: c.fast_time_constant_s,
            slow_rise_per_a2: c.slow_rise_k_per_a2,
            slow_time_constant: c.slow_time_constant_s,
            start_delay: c.start_delay_s,
        }
    }

    pub fn station_spec(&self) -> StationSpec {
        let s = &self.station;
        StationSpec {
            connector_position: v3(s.connector_position_m),
            current_threshold: s.current_threshold_a,
            rearm_delay: s.rearm_delay_s,
            mass: s.mass_kg,
            dimensions: v3(s.dimensions_m),
            contact_tolerance: s.contact_tolerance_m,
        }
    }

    pub fn tether_config(&self) -> Option<TetherConfig> {
        let t = &self.tether;
        if !t.enabled {
            return None;
        }
        let magnet = MagnetSpec::by_name(&t.magnet)?;
        let mut cfg = TetherConfig::with_magnet(
            magnet,
            t.length_m,
            t.linear_mass_density_kg_per_m,
            t.enclosure_mass_g / 1000.0,
        );
        cfg.stiffness = t.stiffness_n_per_m;
        cfg.damping = t.damping_ns_per_m;
        cfg.head_drag = t.head_drag_ns_per_m;
        Some(cfg)
    }

    /// Field models for the whole magnet catalogue, fitted jointly.
    pub fn field_models(&self) -> Result<Vec<EmFieldModel>, SimError> {
        calibrate_field(&MagnetSpec::catalog(), &self.magnetics.targets())
    }

    pub fn field_model(&self) -> Result<Option<EmFieldModel>, SimError> {
        if !self.tether.enabled {
            return Ok(None);
        }
        let models = self.field_models()?;
        Ok(models
            .into_iter()
            .find(|m| m.name.eq_ignore_ascii_case(&self.tether.magnet)))
    }

    /// Power model; the rotor coefficient is fitted on the tetherless
    /// airframe when not given explicitly.
    pub fn power_model(&self) -> Result<PowerModel, SimError> {
        let p = &self.power;
        if let Some(c) = p.induced_coeff_w_per_n1_5 {
            return Ok(PowerModel {
                idle_power: p.idle_power_w,
                induced_coeff: c,
            });
        }
        let flight = CalibrationFlight {
            radius: p.calibration_radius_m,
            speed: p.calibration_speed_mps,
            mass: self.vehicle.mass_g / 1000.0,
            low_battery_voltage: self.mission.low_battery_v,
            debounce: self.mission.low_battery_debounce_s,
        };
        calibrate_power_model(&self.battery_spec(), p.idle_power_w, &flight, p.baseline_flight_time_s)
    }

    pub fn mission_config(&self) -> MissionConfig {
        let m = &self.mission;
        MissionConfig {
            low_battery_voltage: m.low_battery_v,
            low_battery_debounce: m.low_battery_debounce_s,
            approach_trigger: match m.approach_trigger {
                ApproachKind::LowBattery => ApproachTrigger::LowBattery,
                ApproachKind::Timer => ApproachTrigger::Timer {
                    after_s: m.approach_after_s,
                },
            },
            takeoff_trigger: match m.takeoff_trigger {
                TakeoffKind::ChargeComplete => TakeoffTrigger::ChargeComplete,
                TakeoffKind::Dwell => TakeoffTrigger::Dwell { seconds: m.dwell_s },
            },
            travel_speed: m.travel_speed_mps,
            travel_accel: m.travel_accel_mps2,
            cruise_altitude: m.cruise_altitude_m,
            dock_clearance: m.dock_clearance_m,
            dock_overshoot: m.dock_overshoot_m,
            settle_time: m.settle_time_s,
            descent_speed: m.descent_speed_mps,
            dock_timeout: m.dock_timeout_s,
            retry_offset: m.retry_offset_m,
            landing_height: m.landing_height_m,
            landing_offset: Vec3::new(m.landing_offset_m[0], m.landing_offset_m[1], 0.0),
            landing_speed: m.landing_speed_mps,
            climb_speed: m.climb_speed_mps,
            takeoff_climb: m.takeoff_climb_m,
            charge_confirm_time: m.charge_confirm_time_s,
            yaw: m.yaw_deg.to_radians(),
        }
    }

    pub fn tracking_plan(&self) -> TrackingPlan {
        let t = &self.trajectory;
        match t.kind {
            TrajectoryKind::Circle => TrackingPlan::Circle(CircleTrajectory {
                center: Vec3::new(t.center_m[0], t.center_m[1], 0.0),
                radius: t.radius_m,
                speed: t.speed_mps,
                altitude: t.altitude_m,
            }),
            TrajectoryKind::RandomLegs => TrackingPlan::RandomLegs {
                min: v3(t.box_min_m),
                max: v3(t.box_max_m),
                v_max: t.leg_speed_mps,
                a_max: t.leg_accel_mps2,
            },
            TrajectoryKind::Hover => TrackingPlan::Hover(v3(t.hover_point_m)),
        }
    }

    pub fn controller_gains(&self) -> ControllerGains {
        let c = &self.controller;
        ControllerGains {
            position: c.position_gain_per_s2,
            velocity: c.velocity_gain_per_s,
            attitude_bandwidth: c.attitude_bandwidth_rad_per_s,
            attitude_damping: c.attitude_damping_ratio,
            max_tilt: c.max_tilt_deg.to_radians(),
        }
    }

    pub fn ground_contact(&self) -> GroundContact {
        let g = &self.ground;
        GroundContact {
            enabled: g.enabled,
            pad_center: v3(g.pad_center_m),
            pad_radius: g.pad_radius_m,
            penalty_stiffness: g.penalty_stiffness_n_per_m,
            penalty_damping: g.penalty_damping_ns_per_m,
        }
    }

    /// Converts to SI units, runs the magnet and power calibrations and
    /// validates the result.
    pub fn resolve(&self) -> Result<Scenario, SimError> {
        self.check()?;
        let vehicle = self.vehicle_spec();
        let start = match self.mission.start {
            StartKind::Tracking => StartMode::Tracking,
            StartKind::DockWait => StartMode::DockWait {
                head_offset: self.mission.head_offset_m.map(v3),
            },
        };
        let scenario = Scenario {
            name: self.name.clone(),
            variant: self.variant(),
            seed: self.seed,
            dt: self.dt_s,
            control_rate: self.control_rate_hz,
            log_interval: (self.log_interval_s > 0.0).then_some(self.log_interval_s),
            noise: EstimatorConfig::profile(self.noise, vehicle.estimate_rate),
            vehicle,
            battery: self.battery_spec(),
            initial_soc: self.battery.initial_soc_frac,
            ambient_temperature: self.ambient_temperature_degc,
            tether: self.tether_config(),
            field: self.field_model()?,
            station: self.station_spec(),
            charger: self.charger_spec(),
            power: self.power_model()?,
            mission: self.mission_config(),
            plan: self.tracking_plan(),
            start,
            gains: self.controller_gains(),
            ground: self.ground_contact(),
            watchdog: self.watchdog_s,
            em_override: self.em_override,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Fully resolved configuration as TOML, with the fitted rotor
    /// coefficient filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serialises")
    }

    /// Copy with every calibrated quantity written out explicitly.
    pub fn pinned(&self) -> Result<ScenarioConfig, SimError> {
        let mut c = self.clone();
        c.power.induced_coeff_w_per_n1_5 = Some(self.power_model()?.induced_coeff);
        c.preset = None;
        Ok(c)
    }

    /// Hover thrust margin check used by presets: max thrust over weight.
    pub fn thrust_to_weight(&self) -> f64 {
        self.vehicle.max_total_thrust_n / (self.vehicle.mass_g / 1000.0 * GRAVITY)
    }
}
