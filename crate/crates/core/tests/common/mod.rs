//! Closed-form oracles shared by the oracle tests and the acceptance target.
#![allow(dead_code)]

use autocharge_core::autonomy::{plan_trapezoid, track, ControlInput, ControllerGains, RefPoint};
use autocharge_core::dynamics::{
    integrate_bodies, mechanical_energy, GroundContact, HeadMode, StepInputs, TetherConfig, TetherHeadState,
    VehicleSpec, VehicleState,
};
use autocharge_core::magnetics::MagnetSpec;
use autocharge_core::power::{apply_current, charge_step, BatteryState, ChargerEvent, ChargerSpec, ChargerState};
use autocharge_core::scenario::preset;
use autocharge_core::{Vec3, GRAVITY};

pub const DT: f64 = 0.001;

pub fn sd2s_vehicle() -> VehicleSpec {
    preset("sd2s_def_circle").unwrap().vehicle_spec()
}

fn no_ground() -> GroundContact {
    GroundContact {
        enabled: false,
        ..GroundContact::default()
    }
}

fn undamped_tether(length: f64) -> TetherConfig {
    let mut t = TetherConfig::with_magnet(MagnetSpec::cera_m(), length, 0.033, 0.001);
    t.damping = 0.0;
    t.head_drag = 0.0;
    t
}

/// Head dropped from a pinned vehicle with a cable too long to engage.
/// Returns the largest deviation from `p0 + v0 t - g t²/2` over 1 s.
pub fn ballistic_error() -> f64 {
    let spec = sd2s_vehicle();
    let tether = undamped_tether(20.0);
    let ground = no_ground();
    let mut vehicle = VehicleState::at_rest(Vec3::new(0.0, 0.0, 5.0));
    let p0 = vehicle.point_world(&spec.attach_point);
    let v0 = Vec3::new(1.0, -0.5, 3.0);
    let mut head = TetherHeadState {
        position: p0,
        velocity: v0,
        mode: HeadMode::Slack,
    };
    let inp = StepInputs {
        vehicle: &spec,
        tether: Some(&tether),
        field: None,
        ground: &ground,
        disturbance: Vec3::zeros(),
        vehicle_held: true,
    };
    let mut worst = 0.0f64;
    for k in 1..=1000 {
        integrate_bodies(&mut vehicle, Some(&mut head), &inp, DT);
        let t = k as f64 * DT;
        let exact = p0 + v0 * t + Vec3::new(0.0, 0.0, -0.5 * GRAVITY * t * t);
        worst = worst.max((head.position - exact).norm());
    }
    worst
}

pub struct Pendulum {
    pub period: f64,
    /// Largest |E - E0| over the swing energy `m g L (1 - cos θ0)`.
    pub energy_drift: f64,
}

/// Head on an undamped taut cable under a pinned anchor, released at
/// `theta0` from vertical and timed over several periods by
/// interpolated upward zero crossings.
pub fn pendulum(length: f64, theta0: f64, periods: usize) -> Pendulum {
    let spec = sd2s_vehicle();
    let tether = undamped_tether(length);
    let ground = no_ground();
    let mut vehicle = VehicleState::at_rest(Vec3::new(0.0, 0.0, 2.0));
    let anchor = vehicle.point_world(&spec.attach_point);
    // Start on the static stretched length so no radial mode is excited.
    let r = length + tether.head_mass * GRAVITY * theta0.cos() / tether.stiffness;
    let mut head = TetherHeadState {
        position: anchor + Vec3::new(r * theta0.sin(), 0.0, -r * theta0.cos()),
        velocity: Vec3::zeros(),
        mode: HeadMode::Taut,
    };
    let inp = StepInputs {
        vehicle: &spec,
        tether: Some(&tether),
        field: None,
        ground: &ground,
        disturbance: Vec3::zeros(),
        vehicle_held: true,
    };
    let swing = tether.head_mass * GRAVITY * length * (1.0 - theta0.cos());
    let e0 = mechanical_energy(&vehicle, Some(&head), &spec, Some(&tether));
    let mut drift = 0.0f64;
    let mut crossings = Vec::new();
    let mut prev_x = head.position.x - anchor.x;
    let mut k = 0u64;
    while crossings.len() < periods + 1 && k < 1_000_000 {
        integrate_bodies(&mut vehicle, Some(&mut head), &inp, DT);
        k += 1;
        let e = mechanical_energy(&vehicle, Some(&head), &spec, Some(&tether));
        drift = drift.max((e - e0).abs() / swing);
        let x = head.position.x - anchor.x;
        if prev_x < 0.0 && x >= 0.0 {
            let frac = -prev_x / (x - prev_x);
            crossings.push((k as f64 - 1.0 + frac) * DT);
        }
        prev_x = x;
    }
    let period = (crossings[periods] - crossings[0]) / periods as f64;
    Pendulum {
        period,
        energy_drift: drift,
    }
}

pub fn pendulum_period_exact(length: f64) -> f64 {
    2.0 * std::f64::consts::PI * (length / GRAVITY).sqrt()
}

pub struct Hover {
    /// Largest |thrust - m g| / (m g) after `settle` seconds.
    pub thrust_error: f64,
    pub position_error: f64,
}

/// Closed loop on the plain airframe: Lee controller at 500 Hz on the true
/// state, starting 0.5 m off the hover point.
pub fn hover(offset: Vec3, settle: f64, horizon: f64) -> Hover {
    let spec = sd2s_vehicle();
    let gains = ControllerGains::default();
    let ground = no_ground();
    let target = Vec3::new(0.0, 0.0, 1.0);
    let reference = RefPoint::hold(target);
    let mut v = VehicleState::at_rest(target + offset);
    let inp = StepInputs {
        vehicle: &spec,
        tether: None,
        field: None,
        ground: &ground,
        disturbance: Vec3::zeros(),
        vehicle_held: false,
    };
    let weight = spec.mass * GRAVITY;
    let (mut thrust_error, mut position_error) = (0.0f64, 0.0f64);
    let steps = (horizon / DT).round() as u64;
    for k in 0..steps {
        if k % 2 == 0 {
            let s = ControlInput {
                position: v.position,
                velocity: v.velocity,
                attitude: v.attitude,
                angular_velocity: v.angular_velocity,
            };
            let out = track(&s, &reference, &spec, spec.mass, &gains);
            v.commanded_thrust = out.thrust;
            v.commanded_torque = out.torque;
        }
        integrate_bodies(&mut v, None, &inp, DT);
        if k as f64 * DT >= settle {
            thrust_error = thrust_error.max((v.commanded_thrust - weight).abs() / weight);
            position_error = position_error.max((v.position - target).norm());
        }
    }
    Hover {
        thrust_error,
        position_error,
    }
}

/// Largest deviation of the planned segment timing from the closed form
/// `t_ramp = v/a`, `t_cruise = (d - v²/a)/v` (or the triangular
/// `t_ramp = sqrt(d/a)`).
pub fn trapezoid_timing_error() -> f64 {
    let cases = [
        (4.0, 2.0, 1.0),
        (1.0, 2.0, 1.0),
        (10.0, 2.0, 1.0),
        (0.3, 0.5, 2.0),
        (7.5, 1.5, 0.8),
    ];
    let mut worst = 0.0f64;
    for (d, v, a) in cases {
        let seg = plan_trapezoid(Vec3::zeros(), Vec3::new(d, 0.0, 0.0), v, a);
        let (ramp, cruise, peak) = if d >= v * v / a {
            (v / a, (d - v * v / a) / v, v)
        } else {
            ((d / a).sqrt(), 0.0, (d * a).sqrt())
        };
        for err in [
            seg.t_accel - ramp,
            seg.t_decel - ramp,
            seg.t_cruise - cruise,
            seg.peak_speed - peak,
            seg.duration() - (2.0 * ramp + cruise),
            (seg.sample(seg.duration()).position.x - d),
        ] {
            worst = worst.max(err.abs());
        }
    }
    worst
}

/// Ticks for a 910 mAh pack to run from full to empty at 9.1 A.
pub fn coulomb_ticks() -> u64 {
    let pack = preset("sd2s_def_circle").unwrap().battery_spec();
    let mut b = BatteryState::at_rest(&pack, 1.0, 25.0);
    let mut k = 0u64;
    while b.soc > 0.0 && k < 1_000_000 {
        b = apply_current(&b, &pack, 9.1, DT, 25.0).state;
        k += 1;
    }
    k
}

/// Simulated seconds of 1C CC-CV charging from empty to COMPLETE.
pub fn cc_cv_time() -> f64 {
    let cfg = preset("sd2s_def_circle").unwrap();
    let pack = cfg.battery_spec();
    let spec = ChargerSpec {
        start_delay: 0.0,
        protect_temperature: 1000.0,
        resume_temperature: 999.0,
        ..cfg.charger_spec()
    };
    let mut b = BatteryState::at_rest(&pack, 0.0, 25.0);
    let mut c = ChargerState::idle(&spec);
    let dt = 0.01;
    for k in 1..=2_000_000u64 {
        let s = charge_step(&b, &pack, &c, &spec, dt);
        b = s.battery;
        c = s.charger;
        if s.events.contains(&ChargerEvent::Complete) {
            return k as f64 * dt;
        }
    }
    f64::INFINITY
}
