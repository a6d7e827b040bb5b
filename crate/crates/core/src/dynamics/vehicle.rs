use nalgebra::{Matrix3, Quaternion};
use serde::{Deserialize, Serialize};

use crate::math::{e3, gravity, Quat, Vec3, GRAVITY};

/// Physical description of a quadrotor airframe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub name: String,
    /// Take-off mass including the battery, kg.
    pub mass: f64,
    /// Principal moments of inertia, kg·m².
    pub inertia: Vec3,
    pub max_total_thrust: f64,
    /// Rotor arm length, m. Sets the roll/pitch torque limits.
    pub arm_length: f64,
    /// Yaw torque per newton of rotor thrust, m.
    pub yaw_moment_ratio: f64,
    /// Tether anchor in the body frame, m. Hangs below the frame (negative z).
    pub attach_point: Vec3,
    /// Height of the centre of mass above ground when landed, m.
    pub ground_clearance: f64,
    /// State estimate rate, Hz.
    pub estimate_rate: f64,
}

impl VehicleSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.mass > 0.0) {
            return Err(format!("mass must be positive, got {}", self.mass));
        }
        if self.inertia.iter().any(|j| !(*j > 0.0)) {
            return Err("inertia entries must be positive".into());
        }
        if !(self.max_total_thrust > self.mass * GRAVITY) {
            return Err(format!(
                "max_total_thrust {:.3} N cannot hover {:.3} kg",
                self.max_total_thrust, self.mass
            ));
        }
        if !(self.attach_point.z < 0.0) {
            return Err("attach_point must hang below the frame (negative body z)".into());
        }
        if !(self.estimate_rate > 0.0) {
            return Err("estimate_rate must be positive".into());
        }
        Ok(())
    }

    /// Per-axis torque saturation derived from the arm geometry.
    pub fn max_torque(&self) -> Vec3 {
        let per_rotor = self.max_total_thrust / 4.0;
        let roll_pitch = 2.0 * per_rotor * self.arm_length * std::f64::consts::FRAC_1_SQRT_2;
        Vec3::new(roll_pitch, roll_pitch, 2.0 * per_rotor * self.yaw_moment_ratio)
    }

    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&self.inertia)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: Quat,
    pub angular_velocity: Vec3,
    pub commanded_thrust: f64,
    pub commanded_torque: Vec3,
    /// Resting on the ground under inelastic contact.
    pub landed: bool,
}

impl VehicleState {
    pub fn at_rest(position: Vec3) -> Self {
        VehicleState {
            position,
            velocity: Vec3::zeros(),
            attitude: Quat::identity(),
            angular_velocity: Vec3::zeros(),
            commanded_thrust: 0.0,
            commanded_torque: Vec3::zeros(),
            landed: false,
        }
    }

    /// World-frame position of a body-frame point.
    pub fn point_world(&self, body_point: &Vec3) -> Vec3 {
        self.position + self.attitude * body_point
    }

    /// World-frame velocity of a body-frame point.
    pub fn point_velocity(&self, body_point: &Vec3) -> Vec3 {
        let r_world = self.attitude * body_point;
        self.velocity + (self.attitude * self.angular_velocity).cross(&r_world)
    }

    pub fn body_z(&self) -> Vec3 {
        self.attitude * e3()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleDerivative {
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub attitude_rate: Quaternion<f64>,
    pub angular_acceleration: Vec3,
}

/// Newton-Euler time derivative of the rigid body.
///
/// `external_force` is in the world frame; `external_torque` in the body
/// frame. The commanded thrust acts along body z.
pub fn vehicle_derivatives(
    state: &VehicleState,
    spec: &VehicleSpec,
    external_force: &Vec3,
    external_torque: &Vec3,
) -> VehicleDerivative {
    let thrust = state.body_z() * state.commanded_thrust;
    let acceleration = (thrust + external_force) / spec.mass + gravity();

    let w = state.angular_velocity;
    let j = spec.inertia;
    let jw = j.component_mul(&w);
    let angular_acceleration = (state.commanded_torque + external_torque - w.cross(&jw)).component_div(&j);

    let omega_q = Quaternion::new(0.0, w.x, w.y, w.z);
    let attitude_rate = state.attitude.quaternion() * omega_q * 0.5;

    VehicleDerivative {
        velocity: state.velocity,
        acceleration,
        attitude_rate,
        angular_acceleration,
    }
}
