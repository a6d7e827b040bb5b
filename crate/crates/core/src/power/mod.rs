//! Battery discharge, the station balance charger and the flight power draw.

mod battery;
mod charger;
mod flight;

pub use battery::{
    apply_current, current_for_power, discharge_step, BatterySpec, BatteryState, BatteryStep, LowBatteryDetector,
};
pub use charger::{charge_step, ChargeStep, ChargerEvent, ChargerPhase, ChargerSpec, ChargerState};
pub use flight::{calibrate_power_model, time_to_low_battery, CalibrationFlight, PowerModel};
