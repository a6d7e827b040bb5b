use serde::{Deserialize, Serialize};

/// LiPo pack parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatterySpec {
    pub cells: u32,
    /// A·h
    pub capacity: f64,
    /// kg
    pub mass: f64,
    /// Pack voltage at full charge and rest, V.
    pub full_voltage: f64,
    /// Per-cell open-circuit voltage at zero state of charge, V.
    pub empty_voltage_per_cell: f64,
    /// Pack internal resistance, Ω.
    pub internal_resistance: f64,
    /// Lumped thermal mass of the pack, J/K.
    pub heat_capacity: f64,
    /// Pack-to-air thermal time constant, s.
    pub cooling_time_constant: f64,
}

/// Standard LiPo per-cell OCV shape on a 3.30-4.20 V cell.
const OCV_SOC: [f64; 5] = [0.0, 0.1, 0.5, 0.9, 1.0];
const OCV_REFERENCE: [f64; 5] = [3.30, 3.55, 3.72, 3.95, 4.20];

impl BatterySpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(1..=4).contains(&self.cells) {
            return Err(format!("cells must be between 1 and 4, got {}", self.cells));
        }
        if !(self.capacity > 0.0) {
            return Err(format!("capacity must be positive, got {}", self.capacity));
        }
        if !(self.mass > 0.0) {
            return Err("battery mass must be positive".into());
        }
        if !(self.full_voltage / self.cells as f64 > self.empty_voltage_per_cell) {
            return Err("full voltage per cell must exceed the empty voltage".into());
        }
        if !(self.internal_resistance > 0.0) {
            return Err("internal resistance must be positive".into());
        }
        if !(self.heat_capacity > 0.0 && self.cooling_time_constant > 0.0) {
            return Err("thermal parameters must be positive".into());
        }
        Ok(())
    }

    pub fn full_cell_voltage(&self) -> f64 {
        self.full_voltage / self.cells as f64
    }

    /// Charge held at full state of charge, C.
    pub fn capacity_coulombs(&self) -> f64 {
        self.capacity * 3600.0
    }

    /// Pack open-circuit voltage.
    ///
    /// Piecewise-linear in state of charge, anchored at the configured empty
    /// and full cell voltages; interior breakpoints keep the standard LiPo
    /// curve shape between those anchors.
    pub fn ocv(&self, soc: f64) -> f64 {
        let soc = soc.clamp(0.0, 1.0);
        let i = OCV_SOC
            .iter()
            .rposition(|&s| s <= soc)
            .unwrap_or(0)
            .min(OCV_SOC.len() - 2);
        let frac = (soc - OCV_SOC[i]) / (OCV_SOC[i + 1] - OCV_SOC[i]);
        let reference = OCV_REFERENCE[i] + frac * (OCV_REFERENCE[i + 1] - OCV_REFERENCE[i]);
        let shape = (reference - OCV_REFERENCE[0]) / (OCV_REFERENCE[4] - OCV_REFERENCE[0]);
        let cell = self.empty_voltage_per_cell + shape * (self.full_cell_voltage() - self.empty_voltage_per_cell);
        cell * self.cells as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryState {
    pub soc: f64,
    pub terminal_voltage: f64,
    /// A, positive when discharging.
    pub current: f64,
    /// °C
    pub temperature: f64,
}

impl BatteryState {
    pub fn at_rest(spec: &BatterySpec, soc: f64, temperature: f64) -> Self {
        BatteryState {
            soc,
            terminal_voltage: spec.ocv(soc),
            current: 0.0,
            temperature,
        }
    }
}

/// Outcome of one electrical step.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryStep {
    pub state: BatteryState,
    /// The step would have drained the pack below zero charge.
    pub emptied: bool,
}

/// Coulomb-counts a constant current for one step and refreshes the terminal
/// voltage and pack temperature.
pub fn apply_current(batt: &BatteryState, spec: &BatterySpec, current: f64, dt: f64, ambient: f64) -> BatteryStep {
    let raw = batt.soc - current * dt / spec.capacity_coulombs();
    let emptied = raw < 0.0;
    let soc = raw.clamp(0.0, 1.0);

    let heating = current * current * spec.internal_resistance / spec.heat_capacity;
    let cooling = (batt.temperature - ambient) / spec.cooling_time_constant;
    let temperature = (batt.temperature + (heating - cooling) * dt).max(ambient.min(batt.temperature));

    BatteryStep {
        state: BatteryState {
            soc,
            terminal_voltage: spec.ocv(soc) - current * spec.internal_resistance,
            current,
            temperature,
        },
        emptied,
    }
}

/// Current that delivers `power` at the sagged terminal voltage.
///
/// Solves `P = I (OCV - I R)` for the smaller root; beyond the pack's peak
/// power the peak-power current is returned.
pub fn current_for_power(ocv: f64, resistance: f64, power: f64) -> f64 {
    if power <= 0.0 {
        return 0.0;
    }
    let disc = ocv * ocv - 4.0 * resistance * power;
    if disc <= 0.0 {
        return ocv / (2.0 * resistance);
    }
    // Rationalised form of (ocv - sqrt(disc)) / 2R, stable for small R·P.
    2.0 * power / (ocv + disc.sqrt())
}

/// Draws `power` watts from the pack for one step.
pub fn discharge_step(batt: &BatteryState, spec: &BatterySpec, power: f64, dt: f64, ambient: f64) -> BatteryStep {
    let current = current_for_power(spec.ocv(batt.soc), spec.internal_resistance, power.max(0.0));
    apply_current(batt, spec, current, dt, ambient)
}

/// Debounced terminal-voltage threshold.
///
/// Reports low battery once the voltage has stayed at or below the threshold
/// for the whole debounce window, so short load transients do not trigger it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowBatteryDetector {
    pub threshold: f64,
    pub debounce: f64,
    below_since: Option<f64>,
}

impl LowBatteryDetector {
    pub fn new(threshold: f64, debounce: f64) -> Self {
        LowBatteryDetector {
            threshold,
            debounce,
            below_since: None,
        }
    }

    pub fn update(&mut self, voltage: f64, t: f64) -> bool {
        if voltage > self.threshold {
            self.below_since = None;
            return false;
        }
        let since = *self.below_since.get_or_insert(t);
        t - since >= self.debounce - 1e-9
    }

    pub fn reset(&mut self) {
        self.below_since = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn pack_2s() -> BatterySpec {
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
    fn ocv_hits_anchors_and_is_monotone() {
        let s = pack_2s();
        assert_relative_eq!(s.ocv(1.0), 7.4, epsilon = 1e-12);
        assert_relative_eq!(s.ocv(0.0), 6.6, epsilon = 1e-12);
        let mut prev = s.ocv(0.0);
        for i in 1..=1000 {
            let v = s.ocv(i as f64 / 1000.0);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn ocv_reproduces_reference_curve_on_standard_pack() {
        let mut s = pack_2s();
        s.cells = 1;
        s.full_voltage = 4.2;
        for (soc, v) in OCV_SOC.iter().zip(OCV_REFERENCE) {
            assert_relative_eq!(s.ocv(*soc), v, epsilon = 1e-12);
        }
        assert_relative_eq!(s.ocv(0.7), 0.5 * (3.72 + 3.95), epsilon = 1e-12);
    }

    #[test]
    fn open_circuit_leaves_charge_untouched() {
        let s = pack_2s();
        let b = BatteryState::at_rest(&s, 0.63, 25.0);
        let step = discharge_step(&b, &s, 0.0, 0.001, 25.0);
        assert_eq!(step.state.soc, 0.63);
        assert_eq!(step.state.terminal_voltage, s.ocv(0.63));
    }

    #[test]
    fn full_pack_rests_at_configured_voltage() {
        let s = pack_2s();
        assert_relative_eq!(
            BatteryState::at_rest(&s, 1.0, 25.0).terminal_voltage,
            7.4,
            epsilon = 1e-12
        );
    }

    #[test]
    fn coulomb_counting_empties_on_schedule() {
        // 0.91 A·h at 9.1 A lasts 0.1 h.
        let s = pack_2s();
        let dt = 0.001;
        let mut b = BatteryState::at_rest(&s, 1.0, 25.0);
        let mut ticks = 0u64;
        let mut emptied_at = None;
        while emptied_at.is_none() && ticks < 400_000 {
            let step = apply_current(&b, &s, 9.1, dt, 25.0);
            b = step.state;
            ticks += 1;
            if b.soc <= 0.0 {
                emptied_at = Some(ticks);
            }
        }
        let expected = (360.0 / dt) as i64;
        assert!((emptied_at.unwrap() as i64 - expected).abs() <= 1);
    }

    #[test]
    fn loaded_terminal_voltage_sags_below_ocv() {
        let s = pack_2s();
        let b = BatteryState::at_rest(&s, 0.8, 25.0);
        let step = discharge_step(&b, &s, 25.0, 0.001, 25.0);
        assert!(step.state.current > 0.0);
        assert!(step.state.terminal_voltage < s.ocv(step.state.soc));
        assert_relative_eq!(step.state.current * step.state.terminal_voltage, 25.0, epsilon = 1e-3);
    }

    #[test]
    fn overdraw_clamps_and_flags_empty() {
        let s = pack_2s();
        let b = BatteryState::at_rest(&s, 1e-7, 25.0);
        let step = apply_current(&b, &s, 9.1, 0.001, 25.0);
        assert!(step.emptied);
        assert_eq!(step.state.soc, 0.0);
    }

    #[test]
    fn low_battery_debounce() {
        let mut d = LowBatteryDetector::new(6.6, 0.5);
        assert!(!d.update(7.0, 0.0));

        // sustained 0.5 s at 6.59 V
        let mut d = LowBatteryDetector::new(6.6, 0.5);
        let mut fired = None;
        for i in 0..=600 {
            let t = i as f64 * 0.001;
            if d.update(6.59, t) && fired.is_none() {
                fired = Some(t);
            }
        }
        assert_relative_eq!(fired.unwrap(), 0.5, epsilon = 1e-9);

        // 50 ms sag to 6.5 V then recovery
        let mut d = LowBatteryDetector::new(6.6, 0.5);
        let any = (0..2000).any(|i| {
            let t = i as f64 * 0.001;
            let v = if (1.0..1.05).contains(&t) { 6.5 } else { 6.9 };
            d.update(v, t)
        });
        assert!(!any);
    }
}
