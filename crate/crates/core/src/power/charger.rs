use serde::{Deserialize, Serialize};

use super::battery::{apply_current, BatterySpec, BatteryState};

/// Station balance charger settings. Currents are expressed as C-rates so the
/// same charger serves any attached pack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargerSpec {
    /// Constant-current set point, multiples of pack capacity per hour.
    pub c_rate: f64,
    /// Taper current below which charging is complete, C.
    pub cutoff_c_rate: f64,
    /// Throttling starts above this charger temperature, °C.
    pub protect_temperature: f64,
    /// Throttling ends below this charger temperature, °C.
    pub resume_temperature: f64,
    pub ambient_temperature: f64,
    /// Current multiplier while throttled.
    pub throttle_factor: f64,
    /// Steady-state rise of the power stage per A² of output, K/A².
    pub fast_rise_per_a2: f64,
    pub fast_time_constant: f64,
    /// Steady-state rise of the enclosure per A² of output, K/A².
    pub slow_rise_per_a2: f64,
    pub slow_time_constant: f64,
    /// Pack detection time between connection and the first current, s.
    pub start_delay: f64,
}

impl Default for ChargerSpec {
    fn default() -> Self {
        ChargerSpec {
            c_rate: 1.0,
            cutoff_c_rate: 0.05,
            protect_temperature: 60.0,
            resume_temperature: 45.0,
            ambient_temperature: 25.0,
            throttle_factor: 0.5,
            fast_rise_per_a2: 6.0,
            fast_time_constant: 120.0,
            slow_rise_per_a2: 20.0,
            slow_time_constant: 10_800.0,
            start_delay: 2.0,
        }
    }
}

impl ChargerSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.c_rate > 0.0) || !(self.cutoff_c_rate > 0.0) || self.cutoff_c_rate >= self.c_rate {
            return Err("need 0 < cutoff_c_rate < c_rate".into());
        }
        if !(self.resume_temperature < self.protect_temperature) {
            return Err("resume temperature must be below the protection temperature".into());
        }
        if !(self.throttle_factor > 0.0 && self.throttle_factor < 1.0) {
            return Err("throttle factor must lie in (0, 1)".into());
        }
        if !(self.fast_time_constant > 0.0 && self.slow_time_constant > 0.0) {
            return Err("thermal time constants must be positive".into());
        }
        if !(self.start_delay >= 0.0) {
            return Err("start delay must be non-negative".into());
        }
        Ok(())
    }

    pub fn set_current(&self, pack: &BatterySpec) -> f64 {
        self.c_rate * pack.capacity
    }

    pub fn cutoff_current(&self, pack: &BatterySpec) -> f64 {
        self.cutoff_c_rate * pack.capacity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChargerPhase {
    Idle,
    /// Pack connected, detection delay running.
    Detecting,
    ConstantCurrent,
    ConstantVoltage,
    Throttled,
    Complete,
}

impl ChargerPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            ChargerPhase::Idle => "IDLE",
            ChargerPhase::Detecting => "DETECTING",
            ChargerPhase::ConstantCurrent => "CONSTANT_CURRENT",
            ChargerPhase::ConstantVoltage => "CONSTANT_VOLTAGE",
            ChargerPhase::Throttled => "THROTTLED",
            ChargerPhase::Complete => "COMPLETE",
        }
    }

    pub fn is_charging(self) -> bool {
        matches!(
            self,
            ChargerPhase::ConstantCurrent | ChargerPhase::ConstantVoltage | ChargerPhase::Throttled
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargerState {
    pub phase: ChargerPhase,
    /// Active current limit, A.
    pub set_current: f64,
    /// Current delivered into the pack this step, A.
    pub output_current: f64,
    /// °C
    pub temperature: f64,
    fast_rise: f64,
    slow_rise: f64,
    connected_for: f64,
}

impl ChargerState {
    pub fn idle(spec: &ChargerSpec) -> Self {
        ChargerState {
            phase: ChargerPhase::Idle,
            set_current: 0.0,
            output_current: 0.0,
            temperature: spec.ambient_temperature,
            fast_rise: 0.0,
            slow_rise: 0.0,
            connected_for: 0.0,
        }
    }

    pub fn throttled(&self) -> bool {
        self.phase == ChargerPhase::Throttled
    }

    /// Forces the power stage to a given temperature (test hook for the
    /// protection path).
    pub fn force_temperature(&mut self, spec: &ChargerSpec, temperature: f64) {
        self.fast_rise = temperature - spec.ambient_temperature - self.slow_rise;
        self.temperature = temperature;
    }

    fn update_thermal(&mut self, spec: &ChargerSpec, current: f64, dt: f64) {
        let i2 = current * current;
        self.fast_rise += (spec.fast_rise_per_a2 * i2 - self.fast_rise) * dt / spec.fast_time_constant;
        self.slow_rise += (spec.slow_rise_per_a2 * i2 - self.slow_rise) * dt / spec.slow_time_constant;
        self.temperature = spec.ambient_temperature + self.fast_rise + self.slow_rise;
    }

    /// Pack unplugged: output stops, the charger keeps cooling.
    pub fn disconnect(&mut self) {
        self.phase = ChargerPhase::Idle;
        self.set_current = 0.0;
        self.output_current = 0.0;
        self.connected_for = 0.0;
    }

    /// One step with no pack attached.
    pub fn idle_step(&mut self, spec: &ChargerSpec, dt: f64) {
        self.disconnect();
        self.update_thermal(spec, 0.0, dt);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargerEvent {
    /// Detection finished, current starts flowing.
    Start,
    ThrottleOn,
    ThrottleOff,
    Complete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeStep {
    pub battery: BatteryState,
    pub charger: ChargerState,
    pub events: Vec<ChargerEvent>,
}

/// One step of per-cell CC-CV charging into a connected pack.
///
/// The current is the smaller of the (possibly throttled) set point and the
/// current that ends the step with the terminal voltage at full (see
/// [`cv_current`]).
/// Which bound is active selects CC or CV; in CV the taper is exponential
/// wherever the OCV curve is linear. Charging completes once the CV taper
/// falls below the cutoff. The protection hysteresis halves the limit
/// between `protect_temperature` and `resume_temperature`. A freshly
/// connected pack first sits through the detection delay at zero current.
/// Current that lands the terminal voltage on `V_full` at the end of the
/// step: `(V_full - OCV) / (R + k dt / Q)` with `k` the OCV slope over the
/// step. Using the start-of-step OCV alone would overshoot full by the OCV
/// rise within the step.
fn cv_current(batt: &BatteryState, pack: &BatterySpec, dt: f64) -> f64 {
    let ocv = pack.ocv(batt.soc);
    let r = pack.internal_resistance;
    let headroom = pack.full_voltage - ocv;
    if headroom <= 0.0 {
        return 0.0;
    }
    let q = pack.capacity_coulombs();
    // Slope over the step the plain estimate would take, and just above the
    // current charge; the steeper one keeps the end-of-step voltage at or
    // below full across OCV breakpoints.
    let slope = |d: f64| {
        let d = d.min(1.0 - batt.soc);
        if d <= 0.0 {
            0.0
        } else {
            (pack.ocv(batt.soc + d) - ocv) / d
        }
    };
    let k = slope(headroom / r * dt / q).max(slope(1e-9));
    headroom / (r + k * dt / q)
}

pub fn charge_step(
    batt: &BatteryState,
    pack: &BatterySpec,
    charger: &ChargerState,
    spec: &ChargerSpec,
    dt: f64,
) -> ChargeStep {
    let mut next = charger.clone();
    let mut events = Vec::new();

    if charger.phase == ChargerPhase::Complete {
        next.output_current = 0.0;
        next.update_thermal(spec, 0.0, dt);
        let battery = apply_current(batt, pack, 0.0, dt, spec.ambient_temperature).state;
        return ChargeStep {
            battery,
            charger: next,
            events,
        };
    }

    if matches!(charger.phase, ChargerPhase::Idle | ChargerPhase::Detecting) {
        next.connected_for += dt;
        if next.connected_for < spec.start_delay - 1e-9 {
            next.phase = ChargerPhase::Detecting;
            next.output_current = 0.0;
            next.update_thermal(spec, 0.0, dt);
            let battery = apply_current(batt, pack, 0.0, dt, spec.ambient_temperature).state;
            return ChargeStep {
                battery,
                charger: next,
                events,
            };
        }
        events.push(ChargerEvent::Start);
    }

    let mut throttled = charger.throttled();
    if !throttled && charger.temperature > spec.protect_temperature {
        throttled = true;
        events.push(ChargerEvent::ThrottleOn);
    } else if throttled && charger.temperature < spec.resume_temperature {
        throttled = false;
        events.push(ChargerEvent::ThrottleOff);
    }

    let nominal = spec.set_current(pack);
    let limit = if throttled {
        nominal * spec.throttle_factor
    } else {
        nominal
    };
    let cv_current = cv_current(batt, pack, dt);
    let constant_voltage = cv_current <= limit;

    if constant_voltage && cv_current < spec.cutoff_current(pack) {
        if throttled {
            events.push(ChargerEvent::ThrottleOff);
        }
        events.push(ChargerEvent::Complete);
        next.phase = ChargerPhase::Complete;
        next.set_current = 0.0;
        next.output_current = 0.0;
        next.update_thermal(spec, 0.0, dt);
        let battery = apply_current(batt, pack, 0.0, dt, spec.ambient_temperature).state;
        return ChargeStep {
            battery,
            charger: next,
            events,
        };
    }

    let current = limit.min(cv_current);
    next.set_current = limit;
    next.output_current = current;
    next.phase = if throttled {
        ChargerPhase::Throttled
    } else if constant_voltage {
        ChargerPhase::ConstantVoltage
    } else {
        ChargerPhase::ConstantCurrent
    };
    next.update_thermal(spec, current, dt);
    let battery = apply_current(batt, pack, -current, dt, spec.ambient_temperature).state;
    ChargeStep {
        battery,
        charger: next,
        events,
    }
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

    fn instant() -> ChargerSpec {
        ChargerSpec {
            start_delay: 0.0,
            ..ChargerSpec::default()
        }
    }

    #[test]
    fn detection_delay_holds_current_at_zero() {
        let p = pack();
        let spec = ChargerSpec::default();
        let mut b = BatteryState::at_rest(&p, 0.5, 25.0);
        let mut c = ChargerState::idle(&spec);
        let steps = (spec.start_delay / 0.001).round() as usize;
        for i in 1..=steps {
            let s = charge_step(&b, &p, &c, &spec, 0.001);
            b = s.battery;
            c = s.charger;
            if i < steps {
                assert_eq!(c.phase, ChargerPhase::Detecting, "step {i}");
                assert_eq!(c.output_current, 0.0);
                assert!(s.events.is_empty());
            } else {
                assert_eq!(s.events, vec![ChargerEvent::Start]);
                assert_relative_eq!(c.output_current, 0.91, epsilon = 1e-12);
            }
        }
        // unplugging restarts detection
        c.disconnect();
        let s = charge_step(&b, &p, &c, &spec, 0.001);
        assert_eq!(s.charger.phase, ChargerPhase::Detecting);
    }

    #[test]
    fn full_pack_completes_immediately() {
        let p = pack();
        let spec = ChargerSpec::default();
        let b = BatteryState::at_rest(&p, 1.0, 25.0);
        let mut c = ChargerState::idle(&spec);
        c.phase = ChargerPhase::ConstantCurrent;
        let step = charge_step(&b, &p, &c, &spec, 0.001);
        assert_eq!(step.charger.phase, ChargerPhase::Complete);
        assert_eq!(step.events, vec![ChargerEvent::Complete]);
        assert_eq!(step.charger.output_current, 0.0);
    }

    #[test]
    fn constant_current_then_taper() {
        let p = pack();
        let spec = instant();
        let mut b = BatteryState::at_rest(&p, 0.5, 25.0);
        let mut c = ChargerState::idle(&spec);
        let step = charge_step(&b, &p, &c, &spec, 0.001);
        assert_eq!(step.charger.phase, ChargerPhase::ConstantCurrent);
        assert_relative_eq!(step.charger.output_current, 0.91, epsilon = 1e-12);
        assert!(step.battery.current < 0.0);
        assert!(step.battery.soc > 0.5);

        let mut saw_cv = false;
        for _ in 0..3_000_000 {
            let s = charge_step(&b, &p, &c, &spec, 0.001);
            assert!(s.battery.soc >= b.soc);
            assert!(s.battery.terminal_voltage <= p.full_voltage + 1e-12);
            b = s.battery;
            c = s.charger;
            saw_cv |= c.phase == ChargerPhase::ConstantVoltage;
            if c.phase == ChargerPhase::Complete {
                break;
            }
        }
        assert!(saw_cv);
        assert_eq!(c.phase, ChargerPhase::Complete);
        assert!(b.soc > 0.99);
    }

    #[test]
    fn protection_halves_current_and_dips_voltage() {
        let p = pack();
        let spec = instant();
        let b = BatteryState::at_rest(&p, 0.4, 25.0);
        let c = ChargerState::idle(&spec);
        let normal = charge_step(&b, &p, &c, &spec, 0.001);

        let mut hot = normal.charger.clone();
        hot.force_temperature(&spec, spec.protect_temperature + 1.0);
        let throttled = charge_step(&normal.battery, &p, &hot, &spec, 0.001);
        assert_eq!(throttled.events, vec![ChargerEvent::ThrottleOn]);
        assert_eq!(throttled.charger.phase, ChargerPhase::Throttled);
        assert_relative_eq!(throttled.charger.output_current, 0.455, epsilon = 1e-12);
        assert!(throttled.battery.terminal_voltage < normal.battery.terminal_voltage);

        // cools below the resume temperature at the reduced current
        let (mut b, mut c) = (throttled.battery, throttled.charger);
        let mut resumed_at = None;
        for i in 0..2_000_000 {
            let s = charge_step(&b, &p, &c, &spec, 0.001);
            if s.events.contains(&ChargerEvent::ThrottleOff) {
                resumed_at = Some(i);
                b = s.battery;
                c = s.charger;
                break;
            }
            b = s.battery;
            c = s.charger;
        }
        assert!(resumed_at.is_some());
        assert!(c.temperature < spec.resume_temperature);
        let after = charge_step(&b, &p, &c, &spec, 0.001);
        assert_eq!(after.charger.phase, ChargerPhase::ConstantCurrent);
    }

    #[test]
    fn idle_charger_cools_toward_ambient() {
        let spec = ChargerSpec::default();
        let mut c = ChargerState::idle(&spec);
        c.force_temperature(&spec, 50.0);
        for _ in 0..600_000 {
            c.idle_step(&spec, 0.001);
        }
        assert!(c.temperature < 30.0 && c.temperature >= spec.ambient_temperature);
    }
}
