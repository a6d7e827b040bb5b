//! Deterministic simulator and experiment harness for an autonomous quadrotor
//! charging system built around a dangling magnetic charging tether and an
//! electromagnet-assisted ground station.
//!
//! The crate is organised by subsystem:
//!
//! - [`sim`]: clock, world state, the fixed per-tick pipeline, event and
//!   time-series logs.
//! - [`dynamics`]: quadrotor rigid body, tether head, ground contact and the
//!   docking constraint.
//! - [`magnetics`]: connector force law, capture envelope, calibration and
//!   breakaway.
//! - [`power`]: battery discharge, balance charger (CC-CV with thermal
//!   throttling) and the flight power model.
//! - [`station`]: relay/EM controller of the ground station.
//! - [`autonomy`]: trajectory planning, tracking controller, mission FSM and
//!   tracking metrics.
//! - [`scenario`]: unit-suffixed TOML scenario files and shipped presets.
//! - [`experiments`]: magnet sweep, dock-cycle, perpetual-flight and related
//!   batch runners with CSV reports.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autonomy;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod magnetics;
pub mod math;
pub mod power;
pub mod scenario;
pub mod sim;
pub mod station;

pub use error::{ConfigError, SimError};
pub use math::{Quat, Vec3, GRAVITY};
pub use scenario::{load_config, Scenario, ScenarioConfig};
pub use sim::{Event, EventKind, EventLog, SimClock, Simulation, WorldState};
