use serde::{Deserialize, Serialize};

use super::battery::{discharge_step, BatterySpec, BatteryState, LowBatteryDetector};
use crate::error::SimError;
use crate::math::GRAVITY;

/// Electrical draw of the airframe: avionics plus a momentum-theory rotor
/// term, `P = P_idle + c_T * T^(3/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    /// W
    pub idle_power: f64,
    /// W / N^(3/2)
    pub induced_coeff: f64,
}

impl PowerModel {
    pub fn flight_power(&self, thrust: f64) -> f64 {
        self.idle_power + self.induced_coeff * thrust.max(0.0).powf(1.5)
    }
}

/// Circle flown when calibrating the rotor power coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFlight {
    pub radius: f64,
    pub speed: f64,
    /// Mass the rotors carry, kg.
    pub mass: f64,
    pub low_battery_voltage: f64,
    pub debounce: f64,
}

impl CalibrationFlight {
    /// Thrust that holds a level circle at constant speed.
    pub fn nominal_thrust(&self) -> f64 {
        let centripetal = self.speed * self.speed / self.radius;
        self.mass * (GRAVITY * GRAVITY + centripetal * centripetal).sqrt()
    }
}

/// Time from a full pack to the debounced low-battery trigger at constant
/// electrical power.
pub fn time_to_low_battery(pack: &BatterySpec, power: f64, threshold: f64, debounce: f64, dt: f64) -> Option<f64> {
    let mut batt = BatteryState::at_rest(pack, 1.0, 25.0);
    let mut detector = LowBatteryDetector::new(threshold, debounce);
    let max_ticks = (24.0 * 3600.0 / dt) as u64;
    for tick in 1..=max_ticks {
        batt = discharge_step(&batt, pack, power, dt, 25.0).state;
        let t = tick as f64 * dt;
        if detector.update(batt.terminal_voltage, t) {
            return Some(t);
        }
        if batt.soc <= 0.0 {
            return None;
        }
    }
    None
}

/// Chooses `c_T` so that the calibration circle, flown at its nominal
/// thrust from a full pack, reaches the low-battery trigger after
/// `baseline_flight_time` seconds.
pub fn calibrate_power_model(
    pack: &BatterySpec,
    idle_power: f64,
    flight: &CalibrationFlight,
    baseline_flight_time: f64,
) -> Result<PowerModel, SimError> {
    const DT: f64 = 0.01;
    let thrust = flight.nominal_thrust();
    let endurance = |coeff: f64| {
        let model = PowerModel {
            idle_power,
            induced_coeff: coeff,
        };
        time_to_low_battery(
            pack,
            model.flight_power(thrust),
            flight.low_battery_voltage,
            flight.debounce,
            DT,
        )
    };

    let mut hi = 1.0;
    while endurance(hi).is_some_and(|t| t > baseline_flight_time) {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(SimError::invalid("baseline_flight_time", "unreachably short"));
        }
    }
    let mut lo = 0.0;
    match endurance(lo) {
        Some(t) if t >= baseline_flight_time => {}
        _ => {
            return Err(SimError::invalid(
                "baseline_flight_time",
                format!("idle power {idle_power} W alone already drains the pack sooner"),
            ))
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if endurance(mid).is_some_and(|t| t > baseline_flight_time) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(PowerModel {
        idle_power,
        induced_coeff: 0.5 * (lo + hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pack() -> BatterySpec {
        BatterySpec {
            cells: 2,
            capacity: 0.910,
            mass: 0.047,
            full_voltage: 7.4,
            empty_voltage_per_cell: 3.3,
            internal_resistance: 0.08,
            heat_capacity: 45.0,
            cooling_time_constant: 600.0,
        }
    }

    #[test]
    fn idle_draw_at_zero_thrust() {
        let m = PowerModel {
            idle_power: 4.0,
            induced_coeff: 3.0,
        };
        assert_eq!(m.flight_power(0.0), 4.0);
    }

    #[test]
    fn induced_term_scales_with_three_halves_power() {
        let m = PowerModel {
            idle_power: 4.0,
            induced_coeff: 3.0,
        };
        let base = m.flight_power(2.0) - 4.0;
        assert_relative_eq!(m.flight_power(8.0) - 4.0, 8.0 * base, epsilon = 1e-9);
    }

    #[test]
    fn calibration_reproduces_baseline_endurance() {
        let flight = CalibrationFlight {
            radius: 1.0,
            speed: 2.0,
            mass: 0.25,
            low_battery_voltage: 6.6,
            debounce: 0.5,
        };
        let model = calibrate_power_model(&pack(), 8.0, &flight, 360.0).unwrap();
        let t = time_to_low_battery(&pack(), model.flight_power(flight.nominal_thrust()), 6.6, 0.5, 0.01).unwrap();
        assert!((t - 360.0).abs() < 0.05, "{t}");
    }

    #[test]
    fn heavier_load_lands_sooner() {
        let m = PowerModel {
            idle_power: 8.0,
            induced_coeff: 3.0,
        };
        let light = time_to_low_battery(&pack(), m.flight_power(2.6), 6.6, 0.5, 0.01).unwrap();
        let heavy = time_to_low_battery(&pack(), m.flight_power(3.1), 6.6, 0.5, 0.01).unwrap();
        assert!(heavy < light);
    }
}
