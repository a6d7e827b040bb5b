//! Ground-station relay logic: the EM is energised while idle, dropped as
//! soon as charge current is sensed at the connector, and re-armed a fixed
//! delay after the current stops.

use serde::{Deserialize, Serialize};

use crate::dynamics::HeadMode;
use crate::math::Vec3;
use crate::power::ChargerState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationSpec {
    /// Female connector centre, world frame, m.
    pub connector_position: Vec3,
    /// Sensed current that counts as an attached pack, A.
    pub current_threshold: f64,
    /// Dwell between current dropping out and the EM re-energising, s.
    pub rearm_delay: f64,
    /// kg
    pub mass: f64,
    /// Enclosure extents, m.
    pub dimensions: Vec3,
    /// Head-to-connector distance that counts as mated, m.
    pub contact_tolerance: f64,
}

impl StationSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.current_threshold > 0.0) {
            return Err("current_threshold must be positive".into());
        }
        if !(self.rearm_delay > 0.0) {
            return Err("rearm_delay must be positive".into());
        }
        if !(self.contact_tolerance > 0.0) {
            return Err("contact_tolerance must be positive".into());
        }
        Ok(())
    }

    /// Re-arming must wait until a departing head is out of reach: the climb
    /// has to take up the cable slack and then clear the capture envelope.
    pub fn validate_rearm(&self, tether_length: f64, capture_radius: f64, climb_speed: f64) -> Result<(), String> {
        let needed = (tether_length + capture_radius) / climb_speed;
        if self.rearm_delay <= needed {
            return Err(format!(
                "rearm_delay {:.2} s does not cover the {:.2} s a departing head needs to leave the capture envelope",
                self.rearm_delay, needed
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StationMode {
    IdleArmed,
    Charging,
    RearmDelay,
}

impl StationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StationMode::IdleArmed => "IDLE_ARMED",
            StationMode::Charging => "CHARGING",
            StationMode::RearmDelay => "REARM_DELAY",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationControllerState {
    pub state: StationMode,
    pub em_active: bool,
    pub sensed_current: f64,
    pub rearm_timer: f64,
}

impl Default for StationControllerState {
    fn default() -> Self {
        StationControllerState {
            state: StationMode::IdleArmed,
            em_active: true,
            sensed_current: 0.0,
            rearm_timer: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationEvent {
    /// Relay opened on attach; charging begins.
    EmOff,
    /// Relay closed after the re-arm delay.
    EmOn,
}

/// One controller cycle.
pub fn station_tick(
    st: &StationControllerState,
    spec: &StationSpec,
    sensed_current: f64,
    dt: f64,
) -> (StationControllerState, Option<StationEvent>) {
    let mut next = st.clone();
    next.sensed_current = sensed_current;
    let attached = sensed_current >= spec.current_threshold;
    let event = match st.state {
        StationMode::IdleArmed if attached => {
            next.state = StationMode::Charging;
            next.em_active = false;
            Some(StationEvent::EmOff)
        }
        StationMode::IdleArmed => None,
        StationMode::Charging if !attached => {
            next.state = StationMode::RearmDelay;
            next.em_active = false;
            next.rearm_timer = spec.rearm_delay;
            None
        }
        StationMode::Charging => None,
        StationMode::RearmDelay if attached => {
            // A pack plugged in again before the relay closed.
            next.state = StationMode::Charging;
            next.rearm_timer = 0.0;
            None
        }
        StationMode::RearmDelay => {
            next.rearm_timer -= dt;
            if next.rearm_timer <= 1e-9 {
                next.state = StationMode::IdleArmed;
                next.em_active = true;
                next.rearm_timer = 0.0;
                Some(StationEvent::EmOn)
            } else {
                None
            }
        }
    };
    (next, event)
}

/// Current measured through the connector: the charger output while the
/// head is mated, otherwise nothing.
pub fn sensed_current(head_mode: Option<HeadMode>, charger: &ChargerState) -> f64 {
    match head_mode {
        Some(HeadMode::Docked) => charger.output_current,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::{ChargerPhase, ChargerSpec};

    fn spec() -> StationSpec {
        StationSpec {
            connector_position: Vec3::new(0.0, 0.0, 0.06),
            current_threshold: 0.03,
            rearm_delay: 3.0,
            mass: 0.56,
            dimensions: Vec3::new(0.15, 0.10, 0.06),
            contact_tolerance: 0.002,
        }
    }

    fn invariant_holds(st: &StationControllerState, spec: &StationSpec) -> bool {
        match st.state {
            StationMode::IdleArmed => st.em_active,
            StationMode::Charging => !st.em_active,
            StationMode::RearmDelay => !st.em_active && st.rearm_timer > 0.0 && st.rearm_timer <= spec.rearm_delay,
        }
    }

    #[test]
    fn idle_holds_em_on() {
        let (st, ev) = station_tick(&StationControllerState::default(), &spec(), 0.0, 0.001);
        assert_eq!(st.state, StationMode::IdleArmed);
        assert!(st.em_active);
        assert_eq!(ev, None);
    }

    #[test]
    fn attach_opens_relay() {
        let (st, ev) = station_tick(&StationControllerState::default(), &spec(), 2.0, 0.001);
        assert_eq!(st.state, StationMode::Charging);
        assert!(!st.em_active);
        assert_eq!(ev, Some(StationEvent::EmOff));
    }

    #[test]
    fn departure_rearms_after_delay() {
        let s = spec();
        let dt = 0.001;
        let (mut st, _) = station_tick(&StationControllerState::default(), &s, 2.0, dt);
        let (next, _) = station_tick(&st, &s, 0.0, dt);
        st = next;
        assert_eq!(st.state, StationMode::RearmDelay);
        let mut ticks = 0;
        loop {
            let (next, ev) = station_tick(&st, &s, 0.0, dt);
            st = next;
            ticks += 1;
            assert!(invariant_holds(&st, &s));
            if ev == Some(StationEvent::EmOn) {
                break;
            }
            assert!(ticks < 10_000);
        }
        assert_eq!(ticks, 3000);
        assert_eq!(st.state, StationMode::IdleArmed);
        assert!(st.em_active);
    }

    #[test]
    fn sensed_current_follows_mating() {
        let cs = ChargerSpec::default();
        let mut charger = ChargerState::idle(&cs);
        charger.phase = ChargerPhase::ConstantCurrent;
        charger.output_current = 0.91;
        assert_eq!(sensed_current(Some(HeadMode::Slack), &charger), 0.0);
        assert_eq!(sensed_current(None, &charger), 0.0);
        assert_eq!(sensed_current(Some(HeadMode::Docked), &charger), 0.91);
        charger.phase = ChargerPhase::Complete;
        charger.output_current = 0.0;
        assert!(sensed_current(Some(HeadMode::Docked), &charger) < spec().current_threshold);
    }

    #[test]
    fn rearm_validation() {
        let s = spec();
        assert!(s.validate_rearm(0.5, 0.05, 0.5).is_ok());
        assert!(s.validate_rearm(0.5, 0.05, 0.1).is_err());
    }

    proptest::proptest! {
        #[test]
        fn fsm_invariants_and_liveness(currents in proptest::collection::vec(0.0..1.0f64, 1..400)) {
            let s = spec();
            let dt = 0.01;
            let mut st = StationControllerState::default();
            for i in currents {
                let (next, _) = station_tick(&st, &s, i, dt);
                proptest::prop_assert!(invariant_holds(&next, &s));
                proptest::prop_assert!(!(next.em_active && next.sensed_current >= s.current_threshold));
                st = next;
            }
            // vehicle gone for good
            let limit = (s.rearm_delay / dt).round() as usize + 1;
            let mut reached = st.state == StationMode::IdleArmed;
            for _ in 0..limit {
                if reached { break; }
                st = station_tick(&st, &s, 0.0, dt).0;
                reached = st.state == StationMode::IdleArmed;
            }
            proptest::prop_assert!(reached);
        }
    }
}
