//! Quadrotor rigid body and the dangling charging tether.

mod integrate;
mod tether;
mod vehicle;

pub use integrate::{
    dock_constraint, integrate_bodies, mechanical_energy, segment_distance, FieldInput, GroundContact, StepInputs,
    StepReport,
};
pub use tether::{cable_mode, tether_force, HeadMode, TetherConfig, TetherForces, TetherHeadState};
pub use vehicle::{vehicle_derivatives, VehicleDerivative, VehicleSpec, VehicleState};
