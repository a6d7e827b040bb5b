use serde::{Deserialize, Serialize};

use super::tether::{tether_force, HeadMode, TetherConfig, TetherForces, TetherHeadState};
use super::vehicle::{VehicleSpec, VehicleState};
use crate::magnetics::{magnetic_force, EmFieldModel};
use crate::math::{gravity, Quat, Vec3, GRAVITY};

/// Ground plane handling. Inside the landing pad a touchdown is inelastic;
/// elsewhere the frame meets a stiff penalty spring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundContact {
    pub enabled: bool,
    pub pad_center: Vec3,
    pub pad_radius: f64,
    pub penalty_stiffness: f64,
    pub penalty_damping: f64,
}

impl Default for GroundContact {
    fn default() -> Self {
        GroundContact {
            enabled: true,
            pad_center: Vec3::zeros(),
            pad_radius: 100.0,
            penalty_stiffness: 5000.0,
            penalty_damping: 50.0,
        }
    }
}

impl GroundContact {
    fn on_pad(&self, p: &Vec3) -> bool {
        let dx = p.x - self.pad_center.x;
        let dy = p.y - self.pad_center.y;
        dx * dx + dy * dy <= self.pad_radius * self.pad_radius
    }
}

/// Station field acting on the head during a step.
#[derive(Debug, Clone, Copy)]
pub struct FieldInput<'a> {
    pub model: &'a EmFieldModel,
    pub connector: Vec3,
    pub em_active: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct StepInputs<'a> {
    pub vehicle: &'a VehicleSpec,
    pub tether: Option<&'a TetherConfig>,
    pub field: Option<FieldInput<'a>>,
    pub ground: &'a GroundContact,
    /// Extra world-frame force on the vehicle (wind gusts), N.
    pub disturbance: Vec3,
    /// Vehicle bolted in place (test stand).
    pub vehicle_held: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    /// Cable tension after the step, N.
    pub tension: f64,
    pub vehicle_grounded: bool,
    /// Closest approach of the head to the connector during the step, m.
    pub closest_approach: Option<f64>,
}

struct Accelerations {
    vehicle: Vec3,
    vehicle_torque: Vec3,
    head: Vec3,
    cable: TetherForces,
}

fn accelerations(vehicle: &VehicleState, head: Option<&TetherHeadState>, inp: &StepInputs) -> Accelerations {
    let spec = inp.vehicle;
    let mut force = vehicle.body_z() * vehicle.commanded_thrust + inp.disturbance;
    let mut torque = Vec3::zeros();
    let mut head_acc = Vec3::zeros();
    let mut cable = TetherForces::zero();

    if let (Some(h), Some(cfg)) = (head, inp.tether) {
        let anchor = vehicle.point_world(&spec.attach_point);
        let anchor_vel = vehicle.point_velocity(&spec.attach_point);
        cable = tether_force(&anchor, &anchor_vel, h, cfg);
        force += cable.on_vehicle;
        let f_body = vehicle.attitude.inverse() * cable.on_vehicle;
        torque += spec.attach_point.cross(&f_body);

        if h.mode != HeadMode::Docked {
            let mut f_head = cable.on_head - h.velocity * cfg.head_drag;
            if let Some(field) = inp.field {
                f_head += magnetic_force(&h.position, &field.connector, field.model, field.em_active);
            }
            head_acc = f_head / cfg.head_mass + gravity();
        }
    }

    let g = inp.ground;
    if g.enabled && !g.on_pad(&vehicle.position) && vehicle.position.z < spec.ground_clearance {
        let depth = spec.ground_clearance - vehicle.position.z;
        let push = g.penalty_stiffness * depth - g.penalty_damping * vehicle.velocity.z;
        force.z += push.max(0.0);
    }

    Accelerations {
        vehicle: force / spec.mass + gravity(),
        vehicle_torque: torque,
        head: head_acc,
        cable,
    }
}

fn level(q: &Quat) -> Quat {
    let (_, _, yaw) = q.euler_angles();
    Quat::from_euler_angles(0.0, 0.0, yaw)
}

/// Advances vehicle and head by one step.
///
/// Translation uses velocity Verlet (kick-drift-kick), which is symplectic
/// and exact for constant forces; rotation uses semi-implicit Euler with
/// quaternion renormalisation. Ground contact is resolved after the drift.
/// A docked head stays pinned. For a captured head the swept segment of the
/// step is tested against the connector so fast snaps cannot tunnel past it.
pub fn integrate_bodies(
    vehicle: &mut VehicleState,
    mut head: Option<&mut TetherHeadState>,
    inp: &StepInputs,
    dt: f64,
) -> StepReport {
    let spec = inp.vehicle;
    let a0 = accelerations(vehicle, head.as_deref(), inp);

    if !inp.vehicle_held {
        let w = vehicle.angular_velocity;
        let j = spec.inertia;
        let alpha = (vehicle.commanded_torque + a0.vehicle_torque - w.cross(&j.component_mul(&w))).component_div(&j);
        vehicle.angular_velocity += alpha * dt;
        if vehicle.angular_velocity != Vec3::zeros() {
            let dq = Quat::from_scaled_axis(vehicle.angular_velocity * dt);
            let mut q = vehicle.attitude * dq;
            q.renormalize_fast();
            vehicle.attitude = q;
        }
        vehicle.velocity += a0.vehicle * (0.5 * dt);
        vehicle.position += vehicle.velocity * dt;
    }

    let mut swept_from = None;
    if let Some(h) = head.as_deref_mut() {
        if h.mode != HeadMode::Docked {
            swept_from = Some(h.position);
            h.velocity += a0.head * (0.5 * dt);
            h.position += h.velocity * dt;
        }
    }

    let a1 = accelerations(vehicle, head.as_deref(), inp);
    if !inp.vehicle_held {
        vehicle.velocity += a1.vehicle * (0.5 * dt);
    }
    if let Some(h) = head.as_deref_mut() {
        if h.mode != HeadMode::Docked {
            h.velocity += a1.head * (0.5 * dt);
        }
    }

    let mut report = StepReport {
        tension: a1.cable.tension,
        ..StepReport::default()
    };

    let g = inp.ground;
    if g.enabled && !inp.vehicle_held {
        let touching = vehicle.position.z <= spec.ground_clearance;
        if touching && g.on_pad(&vehicle.position) {
            vehicle.position.z = spec.ground_clearance;
            vehicle.velocity = Vec3::zeros();
            vehicle.angular_velocity = Vec3::zeros();
            let (roll, pitch, _) = vehicle.attitude.euler_angles();
            if roll != 0.0 || pitch != 0.0 {
                vehicle.attitude = level(&vehicle.attitude);
            }
        }
        report.vehicle_grounded = touching;
    }
    vehicle.landed = report.vehicle_grounded;

    if let Some(h) = head {
        if h.mode != HeadMode::Docked && g.enabled && h.position.z < 0.0 {
            h.position.z = 0.0;
            h.velocity = Vec3::zeros();
        }
        // A captured head is over the station, whose top face carries the
        // connector. Impacts on it are inelastic, like the ground.
        if let Some(field) = inp.field {
            if h.mode == HeadMode::Captured && h.position.z < field.connector.z {
                h.position.z = field.connector.z;
                h.velocity = Vec3::zeros();
            }
        }
        if let (Some(from), Some(field)) = (swept_from, inp.field) {
            report.closest_approach = Some(segment_distance(&from, &h.position, &field.connector));
        }
    }
    report
}

/// Distance from `point` to the segment `[a, b]`.
pub fn segment_distance(a: &Vec3, b: &Vec3, point: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((point - a).dot(&ab) / len2).clamp(0.0, 1.0)
    };
    (a + ab * t - point).norm()
}

/// Pins a captured head onto the connector once it comes within the contact
/// tolerance. `closest_approach` is the swept distance for the last step, or
/// `None` to use the current position only. Returns true on docking.
pub fn dock_constraint(
    head: &mut TetherHeadState,
    connector: &Vec3,
    tolerance: f64,
    closest_approach: Option<f64>,
) -> bool {
    if head.mode != HeadMode::Captured {
        return false;
    }
    let d = closest_approach.unwrap_or_else(|| (head.position - connector).norm());
    if d > tolerance {
        return false;
    }
    head.mode = HeadMode::Docked;
    head.position = *connector;
    head.velocity = Vec3::zeros();
    true
}

/// Kinetic + gravitational + cable strain energy of vehicle and head, J.
pub fn mechanical_energy(
    vehicle: &VehicleState,
    head: Option<&TetherHeadState>,
    spec: &VehicleSpec,
    tether: Option<&TetherConfig>,
) -> f64 {
    let w = vehicle.angular_velocity;
    let mut e = 0.5 * spec.mass * vehicle.velocity.norm_squared()
        + 0.5 * w.dot(&spec.inertia.component_mul(&w))
        + spec.mass * GRAVITY * vehicle.position.z;
    if let (Some(h), Some(cfg)) = (head, tether) {
        e += 0.5 * cfg.head_mass * h.velocity.norm_squared() + cfg.head_mass * GRAVITY * h.position.z;
        let stretch = (h.position - vehicle.point_world(&spec.attach_point)).norm() - cfg.length;
        if stretch > 0.0 {
            e += 0.5 * cfg.stiffness * stretch * stretch;
        }
    }
    e
}
