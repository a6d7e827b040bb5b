use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    Capture,
    Docked,
    ChargeStart,
    ChargeComplete,
    Detach,
    LowBattery,
    EmOn,
    EmOff,
    ThermalThrottleOn,
    ThermalThrottleOff,
    Timeout,
    BatteryEmpty,
    DockRetry,
    PhaseChange,
}

impl EventKind {
    pub const ALL: [EventKind; 14] = [
        EventKind::Capture,
        EventKind::Docked,
        EventKind::ChargeStart,
        EventKind::ChargeComplete,
        EventKind::Detach,
        EventKind::LowBattery,
        EventKind::EmOn,
        EventKind::EmOff,
        EventKind::ThermalThrottleOn,
        EventKind::ThermalThrottleOff,
        EventKind::Timeout,
        EventKind::BatteryEmpty,
        EventKind::DockRetry,
        EventKind::PhaseChange,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Capture => "CAPTURE",
            EventKind::Docked => "DOCKED",
            EventKind::ChargeStart => "CHARGE_START",
            EventKind::ChargeComplete => "CHARGE_COMPLETE",
            EventKind::Detach => "DETACH",
            EventKind::LowBattery => "LOW_BATTERY",
            EventKind::EmOn => "EM_ON",
            EventKind::EmOff => "EM_OFF",
            EventKind::ThermalThrottleOn => "THERMAL_THROTTLE_ON",
            EventKind::ThermalThrottleOff => "THERMAL_THROTTLE_OFF",
            EventKind::Timeout => "TIMEOUT",
            EventKind::BatteryEmpty => "BATTERY_EMPTY",
            EventKind::DockRetry => "DOCK_RETRY",
            EventKind::PhaseChange => "PHASE_CHANGE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub tick: u64,
    pub kind: EventKind,
    pub payload: Vec<(String, String)>,
}

impl Event {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.payload.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// `key=value;key=value`
    pub fn payload_string(&self) -> String {
        let mut s = String::new();
        for (i, (k, v)) in self.payload.iter().enumerate() {
            if i > 0 {
                s.push(';');
            }
            let _ = write!(s, "{k}={v}");
        }
        s
    }
}

/// Append-only event record, ordered by tick and then insertion.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn push(&mut self, t: f64, tick: u64, kind: EventKind, payload: Vec<(String, String)>) {
        debug_assert!(self.events.last().is_none_or(|e| e.tick <= tick));
        self.events.push(Event { t, tick, kind, payload });
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.of_kind(kind).count()
    }

    pub fn first(&self, kind: EventKind) -> Option<&Event> {
        self.of_kind(kind).next()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,kind,payload\n");
        for e in &self.events {
            let _ = writeln!(s, "{},{},{}", e.t, e.kind.as_str(), e.payload_string());
        }
        s
    }
}

/// Builds a payload from `(key, value)` pairs.
pub fn payload<const N: usize>(pairs: [(&str, String); N]) -> Vec<(String, String)> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut log = EventLog::default();
        log.push(
            0.5,
            500,
            EventKind::Docked,
            payload([("sep", "0.001".into()), ("mode", "x".into())]),
        );
        log.push(0.5, 500, EventKind::EmOff, Vec::new());
        assert_eq!(
            log.to_csv(),
            "t,kind,payload\n0.5,DOCKED,sep=0.001;mode=x\n0.5,EM_OFF,\n"
        );
        assert_eq!(log.count(EventKind::Docked), 1);
        assert_eq!(log.first(EventKind::Docked).unwrap().get("mode"), Some("x"));
    }

    #[test]
    fn names_round_trip() {
        for k in EventKind::ALL {
            assert_eq!(EventKind::parse(k.as_str()), Some(k));
        }
    }
}
