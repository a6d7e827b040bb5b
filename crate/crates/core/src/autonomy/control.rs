use nalgebra::{Matrix3, Rotation3};
use serde::{Deserialize, Serialize};

use super::trajectory::RefPoint;
use crate::dynamics::VehicleSpec;
use crate::math::{e3, vee, Quat, Vec3, GRAVITY};

/// Gains of the cascaded geometric controller.
///
/// Position gains are accelerations per unit error so the same values work
/// for any airframe; they are multiplied by the controller mass. Attitude
/// gains are expressed as a natural frequency and damping ratio and scaled
/// by the inertia.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerGains {
    /// 1/s²
    pub position: f64,
    /// 1/s
    pub velocity: f64,
    /// rad/s
    pub attitude_bandwidth: f64,
    pub attitude_damping: f64,
    /// Largest commanded tilt from vertical, rad.
    pub max_tilt: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        ControllerGains {
            position: 25.0,
            velocity: 9.0,
            attitude_bandwidth: 30.0,
            attitude_damping: 0.9,
            max_tilt: 45f64.to_radians(),
        }
    }
}

/// Sampled vehicle state the controller acts on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: Quat,
    pub angular_velocity: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    /// N
    pub thrust: f64,
    /// Body frame, N·m.
    pub torque: Vec3,
}

/// Limits the horizontal part of a thrust vector so its tilt stays within
/// `max_tilt`; the vertical part is kept at least slightly positive.
fn limit_tilt(f: Vec3, max_tilt: f64) -> Vec3 {
    let vertical = f.z.max(1e-6);
    let horizontal = Vec3::new(f.x, f.y, 0.0);
    let h = horizontal.norm();
    let allowed = vertical * max_tilt.tan();
    let horizontal = if h > allowed {
        horizontal * (allowed / h)
    } else {
        horizontal
    };
    horizontal + e3() * vertical
}

/// Position PD with acceleration feed-forward produces a desired thrust
/// vector; its direction and the reference yaw give the desired attitude,
/// which an SO(3) PD tracks. `mass` is the mass the controller believes it
/// carries (airframe plus any tether). Thrust and torque are saturated to
/// the airframe limits.
pub fn track(
    state: &ControlInput,
    reference: &RefPoint,
    spec: &VehicleSpec,
    mass: f64,
    gains: &ControllerGains,
) -> ControlOutput {
    let ep = reference.position - state.position;
    let ev = reference.velocity - state.velocity;
    let acc = reference.acceleration + ep * gains.position + ev * gains.velocity + e3() * GRAVITY;
    let f_des = limit_tilt(acc * mass, gains.max_tilt);

    let r = state.attitude.to_rotation_matrix();
    let b3 = r * e3();
    let thrust = f_des.dot(&b3).clamp(0.0, spec.max_total_thrust);

    let b3d = f_des.normalize();
    let b1c = Vec3::new(reference.yaw.cos(), reference.yaw.sin(), 0.0);
    let b2d = b3d.cross(&b1c).normalize();
    let b1d = b2d.cross(&b3d);
    let rd = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[b1d, b2d, b3d]));

    let rm = r.matrix();
    let rdm = rd.matrix();
    let e_r = 0.5 * vee(&(rdm.transpose() * rm - rm.transpose() * rdm));
    // Body-rate feed-forward from the reference jerk, so the attitude loop
    // does not lag a turning thrust vector.
    let f_norm = f_des.norm();
    let f_dot = reference.jerk * mass;
    let b3d_dot = (f_dot - b3d * f_dot.dot(&b3d)) / f_norm;
    let w_d = rdm.transpose() * b3d.cross(&b3d_dot);
    let w_d_body = rm.transpose() * rdm * w_d;
    let e_w = state.angular_velocity - w_d_body;

    let j = spec.inertia;
    let w = gains.attitude_bandwidth;
    let k_r = w * w;
    let k_w = 2.0 * gains.attitude_damping * w;
    let om = state.angular_velocity;
    let mut torque = -(e_r * k_r + e_w * k_w).component_mul(&j) + om.cross(&j.component_mul(&om));
    let lim = spec.max_torque();
    for i in 0..3 {
        torque[i] = torque[i].clamp(-lim[i], lim[i]);
    }
    ControlOutput { thrust, torque }
}

/// Attitude whose body z is aligned with the thrust needed to follow
/// `reference` from rest error; used to start runs already in flight.
pub fn trim_attitude(reference: &RefPoint, gains: &ControllerGains) -> Quat {
    let f = limit_tilt(reference.acceleration + e3() * GRAVITY, gains.max_tilt);
    let b3 = f.normalize();
    let b1c = Vec3::new(reference.yaw.cos(), reference.yaw.sin(), 0.0);
    let b2 = b3.cross(&b1c).normalize();
    let b1 = b2.cross(&b3);
    Quat::from_rotation_matrix(&Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[b1, b2, b3])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec() -> VehicleSpec {
        VehicleSpec {
            name: "SD2S".into(),
            mass: 0.25,
            inertia: Vec3::new(3e-4, 3e-4, 5e-4),
            max_total_thrust: 2.5 * 0.25 * GRAVITY,
            arm_length: 0.08,
            yaw_moment_ratio: 0.016,
            attach_point: Vec3::new(0.0, 0.0, -0.03),
            ground_clearance: 0.05,
            estimate_rate: 100.0,
        }
    }

    fn level_at(p: Vec3) -> ControlInput {
        ControlInput {
            position: p,
            velocity: Vec3::zeros(),
            attitude: Quat::identity(),
            angular_velocity: Vec3::zeros(),
        }
    }

    #[test]
    fn equilibrium_output() {
        let s = spec();
        let out = track(
            &level_at(Vec3::new(0.0, 0.0, 1.0)),
            &RefPoint::hold(Vec3::new(0.0, 0.0, 1.0)),
            &s,
            s.mass,
            &ControllerGains::default(),
        );
        assert_relative_eq!(out.thrust, s.mass * GRAVITY, epsilon = 1e-12);
        assert_relative_eq!(out.torque.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn climbs_toward_higher_setpoint() {
        let s = spec();
        let out = track(
            &level_at(Vec3::zeros()),
            &RefPoint::hold(Vec3::new(0.0, 0.0, 0.5)),
            &s,
            s.mass,
            &ControllerGains::default(),
        );
        assert!(out.thrust > s.mass * GRAVITY);
    }

    #[test]
    fn outputs_saturate() {
        let s = spec();
        let out = track(
            &level_at(Vec3::zeros()),
            &RefPoint::hold(Vec3::new(50.0, -80.0, 100.0)),
            &s,
            s.mass,
            &ControllerGains::default(),
        );
        assert!(out.thrust <= s.max_total_thrust);
        let lim = s.max_torque();
        for i in 0..3 {
            assert!(out.torque[i].abs() <= lim[i] + 1e-15);
        }
    }

    #[test]
    fn lateral_error_tilts_toward_target() {
        let s = spec();
        let out = track(
            &level_at(Vec3::zeros()),
            &RefPoint::hold(Vec3::new(0.1, 0.0, 0.0)),
            &s,
            s.mass,
            &ControllerGains::default(),
        );
        // positive pitch rotates body z toward +x
        assert!(out.torque.y > 0.0);
    }

    #[test]
    fn trim_matches_reference_acceleration() {
        let r = RefPoint {
            position: Vec3::zeros(),
            velocity: Vec3::zeros(),
            acceleration: Vec3::new(-4.0, 0.0, 0.0),
            jerk: Vec3::zeros(),
            yaw: 0.0,
        };
        let q = trim_attitude(&r, &ControllerGains::default());
        let b3 = q * e3();
        let want = Vec3::new(-4.0, 0.0, GRAVITY).normalize();
        assert_relative_eq!((b3 - want).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn turning_on_the_reference_needs_no_correction() {
        use crate::autonomy::CircleTrajectory;
        let s = spec();
        let g = ControllerGains::default();
        let c = CircleTrajectory {
            center: Vec3::zeros(),
            radius: 1.0,
            speed: 2.0,
            altitude: 1.0,
        };
        let t = 0.7;
        let r = c.sample(t);
        let q = trim_attitude(&r, &g);
        // body rate of the trimmed attitude by central difference
        let h = 1e-6;
        let dq = trim_attitude(&c.sample(t - h), &g).inverse() * trim_attitude(&c.sample(t + h), &g);
        let w = dq.scaled_axis() / (2.0 * h);
        let on_ref = ControlInput {
            position: r.position,
            velocity: r.velocity,
            attitude: q,
            angular_velocity: w,
        };
        let out = track(&on_ref, &r, &s, s.mass, &g);
        let gyro = w.cross(&s.inertia.component_mul(&w));
        // roll and pitch only: the yaw rate implied by holding the heading
        // is left to the yaw loop
        let miss = out.torque - gyro;
        assert!(miss.x.abs() < 1e-9 && miss.y.abs() < 1e-9, "{miss:?}");

        let mut lagging = on_ref;
        lagging.angular_velocity = Vec3::zeros();
        assert!(track(&lagging, &r, &s, s.mass, &g).torque.norm() > 1e-4);
    }
}
