//! Fixed-step simulation: world state, the per-tick pipeline and its logs.
//!
//! Each tick runs, in order: estimator sample, station FSM, mission FSM and
//! flight controller (on control ticks), magnetic capture, tether breakaway,
//! battery and charger, rigid-body integration, docking constraint, safety
//! monitors and logging.

mod clock;
mod estimator;
mod events;
mod log;
mod world;

pub use clock::SimClock;
pub use estimator::{Estimate, Estimator, EstimatorConfig, NoiseProfile};
pub use events::{payload, Event, EventKind, EventLog};
pub use log::{timeseries_csv, LogRow, TIMESERIES_HEADER};
pub use world::WorldState;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autonomy::{
    mission_tick, pre_dock_point, track, trim_attitude, ControlInput, MissionContext, MissionEvent, MissionPhase,
    MissionState, RefPoint, RmseAccumulator, TrackingMetrics, TrackingPlan,
};
use crate::dynamics::{
    cable_mode, dock_constraint, integrate_bodies, tether_force, FieldInput, HeadMode, StepInputs, TetherHeadState,
    VehicleSpec, VehicleState,
};
use crate::error::SimError;
use crate::magnetics::{breakaway_check, try_capture};
use crate::math::{e3, is_finite, Quat, Vec3, GRAVITY};
use crate::power::{charge_step, discharge_step, BatteryState, ChargerEvent, ChargerState};
use crate::scenario::{Scenario, StartMode};
use crate::station::{sensed_current, station_tick, StationControllerState, StationEvent};

/// Per-run safety bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SafetyStats {
    pub min_tension: f64,
    /// Ticks with the EM energised while charge current was sensed.
    pub em_conflicts: u64,
    /// Ticks with a docked head farther than the contact tolerance.
    pub dock_violations: u64,
}

/// Why [`Simulation::run_until`] returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Stopped,
    TimedOut,
}

pub struct Simulation {
    pub scenario: Scenario,
    pub world: WorldState,
    pub events: EventLog,
    pub rows: Vec<LogRow>,
    pub safety: SafetyStats,
    pub rmse: RmseAccumulator,
    pub low_battery_time: Option<f64>,
    vehicle: VehicleSpec,
    controller_mass: f64,
    estimator: Estimator,
    plan_rng: ChaCha8Rng,
    estimate_every: u64,
    control_every: u64,
    log_every: Option<u64>,
    tracking_error: f64,
    battery_emptied: bool,
}

fn f(v: f64) -> String {
    format!("{v}")
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self, SimError> {
        scenario.validate()?;
        let clock = SimClock::new(scenario.dt);
        let vehicle_spec = scenario.dynamics_vehicle();
        let controller_mass = scenario.controller_mass();
        let yaw = scenario.mission.yaw;

        let hover = |p: Vec3| {
            let mut v = VehicleState::at_rest(p);
            v.attitude = Quat::from_euler_angles(0.0, 0.0, yaw);
            v.commanded_thrust = controller_mass * GRAVITY;
            v
        };
        let hang = |v: &VehicleState, head_at: Option<Vec3>| -> Option<TetherHeadState> {
            scenario.tether.as_ref().map(|t| {
                let anchor = v.point_world(&scenario.vehicle.attach_point);
                let b3 = v.body_z();
                let load = t.head_mass * GRAVITY / t.stiffness;
                let position = head_at.unwrap_or(anchor - b3 * (t.length + load));
                TetherHeadState {
                    position,
                    velocity: v.velocity,
                    mode: HeadMode::Taut,
                }
            })
        };

        let connector = scenario.station.connector_position;
        let context_at = |p: Vec3| MissionContext {
            t: 0.0,
            position: p,
            velocity: Vec3::zeros(),
            landed: false,
            head_mode: None,
            battery_voltage: 0.0,
            battery_current: 0.0,
            connector,
            attach_point: scenario.vehicle.attach_point,
            tether_length: scenario.tether.as_ref().map_or(0.0, |t| t.length),
            full_voltage: scenario.battery.full_voltage,
            charge_cutoff: scenario.charger.cutoff_current(&scenario.battery),
            ground_clearance: scenario.vehicle.ground_clearance,
        };

        let (vehicle, head, mission) = match &scenario.start {
            StartMode::Tracking => {
                let mut r0 = match &scenario.plan {
                    TrackingPlan::Circle(c) => c.sample(0.0),
                    other => RefPoint::hold(other.entry_point()),
                };
                r0.yaw = yaw;
                let mut v = VehicleState::at_rest(r0.position);
                v.velocity = r0.velocity;
                v.attitude = trim_attitude(&r0, &scenario.gains);
                v.commanded_thrust = controller_mass * (r0.acceleration + e3() * GRAVITY).norm();
                let head = hang(&v, None);
                let m = MissionState::tracking(scenario.plan.clone(), &scenario.mission, 0.0, r0);
                (v, head, m)
            }
            StartMode::DockWait { head_offset } => {
                let t = scenario.tether.as_ref().expect("validated");
                let (v, head_at) = match head_offset {
                    Some(off) => {
                        let head_at = connector + off;
                        let load = t.head_mass * GRAVITY / t.stiffness;
                        let anchor = head_at + Vec3::new(0.0, 0.0, t.length + load);
                        let v = hover(Vec3::zeros());
                        let p = anchor - v.attitude * scenario.vehicle.attach_point;
                        (hover(p), Some(head_at))
                    }
                    None => (
                        hover(pre_dock_point(&scenario.mission, &context_at(Vec3::zeros()))),
                        None,
                    ),
                };
                let head = hang(&v, head_at);
                let m = MissionState::dock_wait(scenario.plan.clone(), &scenario.mission, &context_at(v.position));
                (v, head, m)
            }
        };

        let battery = BatteryState::at_rest(&scenario.battery, scenario.initial_soc, scenario.ambient_temperature);
        let mut station = StationControllerState::default();
        if let Some(em) = scenario.em_override {
            station.em_active = em;
        }
        let world = WorldState {
            clock,
            vehicle,
            head,
            battery,
            charger: ChargerState::idle(&scenario.charger),
            station,
            mission,
            rng_seed: scenario.seed,
            tension: 0.0,
        };

        let mut estimator = Estimator::new(scenario.noise.clone(), scenario.seed);
        estimator.sample(&world.vehicle.position, &world.vehicle.velocity);
        let mut plan_rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        plan_rng.set_stream(2);

        let mut sim = Simulation {
            estimate_every: clock.decimation(scenario.noise.rate),
            control_every: clock.decimation(scenario.control_rate),
            log_every: scenario.log_interval.map(|l| ((l / scenario.dt).round() as u64).max(1)),
            vehicle: vehicle_spec,
            controller_mass,
            estimator,
            plan_rng,
            scenario,
            world,
            events: EventLog::default(),
            rows: Vec::new(),
            safety: SafetyStats {
                min_tension: f64::INFINITY,
                ..SafetyStats::default()
            },
            rmse: RmseAccumulator::default(),
            low_battery_time: None,
            tracking_error: 0.0,
            battery_emptied: false,
        };
        sim.record_row();
        Ok(sim)
    }

    pub fn t(&self) -> f64 {
        self.world.clock.t()
    }

    fn emit(&mut self, kind: EventKind, payload: Vec<(String, String)>) {
        let c = self.world.clock;
        self.events.push(c.t(), c.tick, kind, payload);
    }

    fn record_row(&mut self) {
        if self.log_every.is_none() {
            return;
        }
        let w = &self.world;
        let v = &w.vehicle;
        self.rows.push(LogRow {
            t: w.clock.t(),
            x: v.position.x,
            y: v.position.y,
            z: v.position.z,
            vx: v.velocity.x,
            vy: v.velocity.y,
            vz: v.velocity.z,
            battery_v: w.battery.terminal_voltage,
            battery_soc: w.battery.soc,
            charger_current: w.charger.output_current,
            em_active: w.station.em_active,
            mission_phase: w.mission.phase.as_str(),
            station_state: w.station.state.as_str(),
            tether_tension: w.tension,
            rmse_instant: self.tracking_error,
        });
    }

    fn mission_context(&self) -> MissionContext {
        let w = &self.world;
        let est = self.estimator.estimate;
        MissionContext {
            t: w.clock.t(),
            position: est.position,
            velocity: est.velocity,
            landed: w.vehicle.landed,
            head_mode: w.head.as_ref().map(|h| h.mode),
            battery_voltage: w.battery.terminal_voltage,
            battery_current: w.battery.current,
            connector: self.scenario.station.connector_position,
            attach_point: self.scenario.vehicle.attach_point,
            tether_length: self.scenario.tether.as_ref().map_or(0.0, |t| t.length),
            full_voltage: self.scenario.battery.full_voltage,
            charge_cutoff: self.scenario.charger.cutoff_current(&self.scenario.battery),
            ground_clearance: self.scenario.vehicle.ground_clearance,
        }
    }

    /// Advances the world by one physics step.
    pub fn step(&mut self) -> Result<(), SimError> {
        let tick = self.world.clock.tick;
        let dt = self.scenario.dt;
        let t = self.world.clock.t();

        // estimator
        if tick.is_multiple_of(self.estimate_every) && tick > 0 {
            let v = &self.world.vehicle;
            self.estimator.sample(&v.position, &v.velocity);
        } else if tick > 0 {
            self.estimator.predict(dt);
        }

        // station
        let sensed = sensed_current(self.world.head.as_ref().map(|h| h.mode), &self.world.charger);
        let (mut station, ev) = station_tick(&self.world.station, &self.scenario.station, sensed, dt);
        if let Some(em) = self.scenario.em_override {
            station.em_active = em;
        }
        self.world.station = station;
        match ev {
            Some(StationEvent::EmOff) => self.emit(EventKind::EmOff, payload([("current_a", f(sensed))])),
            Some(StationEvent::EmOn) => self.emit(EventKind::EmOn, Vec::new()),
            None => {}
        }
        if self.world.station.em_active && sensed >= self.scenario.station.current_threshold {
            self.safety.em_conflicts += 1;
        }

        // mission and flight controller
        if tick.is_multiple_of(self.control_every) {
            let ctx = self.mission_context();
            let out = mission_tick(
                &mut self.world.mission,
                &self.scenario.mission,
                &ctx,
                &mut self.plan_rng,
            );
            for e in out.events {
                match e {
                    MissionEvent::LowBattery { voltage } => {
                        if self.low_battery_time.is_none() {
                            self.low_battery_time = Some(t);
                        }
                        self.emit(EventKind::LowBattery, payload([("voltage_v", f(voltage))]));
                    }
                    MissionEvent::DockRetry { attempt } => {
                        self.emit(EventKind::DockRetry, payload([("attempt", attempt.to_string())]))
                    }
                    MissionEvent::PhaseChange { from, to } => self.emit(
                        EventKind::PhaseChange,
                        payload([("from", from.as_str().to_string()), ("to", to.as_str().to_string())]),
                    ),
                }
            }
            let v = &mut self.world.vehicle;
            if out.motors_enabled {
                let input = ControlInput {
                    position: ctx.position,
                    velocity: ctx.velocity,
                    attitude: v.attitude,
                    angular_velocity: v.angular_velocity,
                };
                // once the station holds the head its weight is off the airframe
                let held = ctx.head_mode.is_some_and(|m| !m.is_free());
                let head = self.scenario.tether.as_ref().map_or(0.0, |t| t.head_mass);
                let mass = if held {
                    self.controller_mass - head
                } else {
                    self.controller_mass
                };
                let cmd = track(&input, &out.reference, &self.vehicle, mass, &self.scenario.gains);
                v.commanded_thrust = cmd.thrust;
                v.commanded_torque = cmd.torque;
            } else {
                v.commanded_thrust = 0.0;
                v.commanded_torque = Vec3::zeros();
            }
            self.tracking_error = (v.position - out.reference.position).norm();
            if self.world.mission.phase == MissionPhase::Tracking {
                self.rmse.push(self.tracking_error);
            }
        }

        let connector = self.scenario.station.connector_position;
        let em_active = self.world.station.em_active;

        // magnetic capture
        if let (Some(head), Some(field)) = (self.world.head.as_mut(), self.scenario.field.as_ref()) {
            if head.mode.is_free() {
                let next = try_capture(head, &connector, field, em_active);
                if next.mode == HeadMode::Captured {
                    let sep = (next.position - connector).norm();
                    *head = next;
                    self.emit(EventKind::Capture, payload([("separation_m", f(sep))]));
                }
            }
        }

        // tether breakaway
        if let (Some(head), Some(cfg), Some(field)) = (
            self.world.head.as_mut(),
            self.scenario.tether.as_ref(),
            self.scenario.field.as_ref(),
        ) {
            if head.mode == HeadMode::Docked {
                let attach = &self.scenario.vehicle.attach_point;
                let v = &self.world.vehicle;
                let cable = tether_force(&v.point_world(attach), &v.point_velocity(attach), head, cfg);
                if breakaway_check(head.mode, cable.tension, field, em_active) {
                    head.mode = HeadMode::Slack;
                    head.velocity = Vec3::zeros();
                    self.emit(EventKind::Detach, payload([("tension_n", f(cable.tension))]));
                }
            }
        }

        // battery and charger
        let docked = self.world.head.as_ref().is_some_and(|h| h.mode == HeadMode::Docked);
        let ambient = self.scenario.ambient_temperature;
        if docked {
            let step = charge_step(
                &self.world.battery,
                &self.scenario.battery,
                &self.world.charger,
                &self.scenario.charger,
                dt,
            );
            self.world.battery = step.battery;
            self.world.charger = step.charger;
            for e in step.events {
                match e {
                    ChargerEvent::Start => {
                        self.emit(EventKind::ChargeStart, payload([("soc", f(self.world.battery.soc))]))
                    }
                    ChargerEvent::ThrottleOn => self.emit(
                        EventKind::ThermalThrottleOn,
                        payload([("temperature_c", f(self.world.charger.temperature))]),
                    ),
                    ChargerEvent::ThrottleOff => self.emit(
                        EventKind::ThermalThrottleOff,
                        payload([("temperature_c", f(self.world.charger.temperature))]),
                    ),
                    ChargerEvent::Complete => self.emit(
                        EventKind::ChargeComplete,
                        payload([("voltage_v", f(self.world.battery.terminal_voltage))]),
                    ),
                }
            }
        } else {
            self.world.charger.idle_step(&self.scenario.charger, dt);
            let thrust = self.world.vehicle.commanded_thrust;
            let power = self.scenario.power.flight_power(thrust);
            let step = discharge_step(&self.world.battery, &self.scenario.battery, power, dt, ambient);
            self.world.battery = step.state;
            if step.emptied && !self.battery_emptied {
                self.battery_emptied = true;
                self.emit(EventKind::BatteryEmpty, Vec::new());
            }
        }

        // integrate
        let disturbance = self.estimator.gust;
        let inputs = StepInputs {
            vehicle: &self.vehicle,
            tether: self.scenario.tether.as_ref(),
            field: self.scenario.field.as_ref().map(|model| FieldInput {
                model,
                connector,
                em_active,
            }),
            ground: &self.scenario.ground,
            disturbance,
            vehicle_held: false,
        };
        let report = integrate_bodies(&mut self.world.vehicle, self.world.head.as_mut(), &inputs, dt);
        self.world.tension = report.tension;

        // docking constraint
        self.world.clock.advance();
        let tolerance = self.scenario.station.contact_tolerance;
        if let Some(head) = self.world.head.as_mut() {
            if head.mode == HeadMode::Captured {
                if dock_constraint(head, &connector, tolerance, report.closest_approach) {
                    self.emit(EventKind::Docked, Vec::new());
                }
            } else if let Some(cfg) = self.scenario.tether.as_ref() {
                let anchor = self.world.vehicle.point_world(&self.scenario.vehicle.attach_point);
                head.mode = cable_mode(&anchor, head, cfg);
            }
        }

        self.monitor()?;
        if let Some(every) = self.log_every {
            if self.world.clock.tick.is_multiple_of(every) {
                self.record_row();
            }
        }
        Ok(())
    }

    fn monitor(&mut self) -> Result<(), SimError> {
        let tick = self.world.clock.tick;
        let w = &self.world;
        let bad = |ok: bool, field: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(SimError::NonFinite { field, tick })
            }
        };
        bad(is_finite(&w.vehicle.position), "vehicle.position")?;
        bad(is_finite(&w.vehicle.velocity), "vehicle.velocity")?;
        bad(
            w.vehicle.attitude.coords.iter().all(|c| c.is_finite()),
            "vehicle.attitude",
        )?;
        bad(is_finite(&w.vehicle.angular_velocity), "vehicle.angular_velocity")?;
        bad(w.vehicle.commanded_thrust.is_finite(), "vehicle.commanded_thrust")?;
        bad(w.battery.terminal_voltage.is_finite(), "battery.terminal_voltage")?;
        bad(w.battery.soc.is_finite(), "battery.soc")?;
        bad(w.charger.temperature.is_finite(), "charger.temperature")?;
        bad(w.tension.is_finite(), "tether.tension")?;
        if let Some(h) = &w.head {
            bad(is_finite(&h.position), "head.position")?;
            bad(is_finite(&h.velocity), "head.velocity")?;
            if h.mode == HeadMode::Docked
                && (h.position - self.scenario.station.connector_position).norm()
                    > self.scenario.station.contact_tolerance
            {
                self.safety.dock_violations += 1;
            }
        }
        self.safety.min_tension = self.safety.min_tension.min(w.tension);

        let phase_age = w.clock.t() - w.mission.phase_entry_time;
        if phase_age > self.scenario.watchdog {
            return Err(SimError::Deadlock {
                phase: w.mission.phase.as_str().to_string(),
                seconds: phase_age,
                t: w.clock.t(),
            });
        }
        Ok(())
    }

    /// Steps until `stop` holds after a step or `t_max` is reached. On the
    /// time limit a TIMEOUT event is appended.
    pub fn run_until<F>(&mut self, mut stop: F, t_max: f64) -> Result<RunOutcome, SimError>
    where
        F: FnMut(&Simulation) -> bool,
    {
        if !(t_max > 0.0) {
            return Err(SimError::invalid("t_max", "must be positive"));
        }
        let max_tick = (t_max / self.scenario.dt).round() as u64;
        while self.world.clock.tick < max_tick {
            self.step()?;
            if stop(self) {
                return Ok(RunOutcome::Stopped);
            }
        }
        self.emit(EventKind::Timeout, payload([("t_max_s", f(t_max))]));
        Ok(RunOutcome::TimedOut)
    }

    /// Tracking metrics for the run so far.
    pub fn metrics(&self) -> Result<TrackingMetrics, SimError> {
        let rmse = self.rmse.rmse().ok_or(SimError::EmptyMetrics)?;
        Ok(TrackingMetrics {
            rmse,
            samples: self.rmse.count(),
            flight_time: self.low_battery_time.unwrap_or(self.t()),
        })
    }

    pub fn timeseries_csv(&self) -> String {
        timeseries_csv(&self.rows)
    }

    pub fn events_csv(&self) -> String {
        self.events.to_csv()
    }

    /// Serialised world state, for byte-level determinism checks.
    pub fn state_json(&self) -> String {
        serde_json::to_string(&self.world).expect("world state serialises")
    }
}
