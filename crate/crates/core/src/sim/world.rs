use serde::{Deserialize, Serialize};

use super::clock::SimClock;
use crate::autonomy::MissionState;
use crate::dynamics::{TetherHeadState, VehicleState};
use crate::power::{BatteryState, ChargerState};
use crate::station::StationControllerState;

/// Complete simulation state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub clock: SimClock,
    pub vehicle: VehicleState,
    /// Absent when the vehicle flies without a tether.
    pub head: Option<TetherHeadState>,
    pub battery: BatteryState,
    pub charger: ChargerState,
    pub station: StationControllerState,
    pub mission: MissionState,
    pub rng_seed: u64,
    /// Latest cable tension, N.
    pub tension: f64,
}
