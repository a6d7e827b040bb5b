//! Cross-checks applied to every run's logs.

use crate::autonomy::MissionPhase;
use crate::sim::{EventKind, EventLog, LogRow, SafetyStats, Simulation};

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub rule: &'static str,
    pub detail: String,
}

/// Replays an event log and flags illegal phase transitions, CHARGING
/// without a docked head and EM events out of sequence.
pub fn check_events(log: &EventLog) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut docked = false;
    let mut em_on = true;
    for e in log.events() {
        match e.kind {
            EventKind::Docked => docked = true,
            EventKind::Detach => docked = false,
            EventKind::EmOff | EventKind::EmOn => {
                let on = e.kind == EventKind::EmOn;
                if on == em_on {
                    out.push(Violation {
                        t: e.t,
                        rule: "em_sequence",
                        detail: format!("{} while already {}", e.kind.as_str(), if on { "on" } else { "off" }),
                    });
                }
                em_on = on;
            }
            EventKind::PhaseChange => {
                let from = e.get("from").and_then(MissionPhase::parse);
                let to = e.get("to").and_then(MissionPhase::parse);
                match (from, to) {
                    (Some(from), Some(to)) => {
                        if !MissionPhase::is_legal_transition(from, to) {
                            out.push(Violation {
                                t: e.t,
                                rule: "illegal_transition",
                                detail: format!("{} -> {}", from.as_str(), to.as_str()),
                            });
                        }
                        if to == MissionPhase::Charging && !docked {
                            out.push(Violation {
                                t: e.t,
                                rule: "charging_without_dock",
                                detail: "CHARGING entered with no docked head".into(),
                            });
                        }
                    }
                    _ => out.push(Violation {
                        t: e.t,
                        rule: "malformed_event",
                        detail: e.payload_string(),
                    }),
                }
            }
            _ => {}
        }
    }
    out
}

/// Tension sign, EM/current exclusion and docking contact.
pub fn check_safety(stats: &SafetyStats) -> Vec<Violation> {
    let mut out = Vec::new();
    if stats.min_tension < 0.0 {
        out.push(Violation {
            t: f64::NAN,
            rule: "negative_tension",
            detail: format!("min tension {}", stats.min_tension),
        });
    }
    if stats.em_conflicts > 0 {
        out.push(Violation {
            t: f64::NAN,
            rule: "em_with_current",
            detail: format!("{} ticks with EM on while current sensed", stats.em_conflicts),
        });
    }
    if stats.dock_violations > 0 {
        out.push(Violation {
            t: f64::NAN,
            rule: "dock_contact",
            detail: format!("{} ticks docked outside contact tolerance", stats.dock_violations),
        });
    }
    out
}

/// Flags the first logged sample holding a NaN or infinity.
pub fn check_rows(rows: &[LogRow]) -> Vec<Violation> {
    let bad = rows.iter().find(|r| {
        ![
            r.t,
            r.x,
            r.y,
            r.z,
            r.vx,
            r.vy,
            r.vz,
            r.battery_v,
            r.battery_soc,
            r.charger_current,
            r.tether_tension,
            r.rmse_instant,
        ]
        .iter()
        .all(|v| v.is_finite())
    });
    bad.map(|r| Violation {
        t: r.t,
        rule: "non_finite",
        detail: "non-finite value in the time series".into(),
    })
    .into_iter()
    .collect()
}

/// Every check above over one simulation.
pub fn check_run(sim: &Simulation) -> Vec<Violation> {
    let mut v = check_events(&sim.events);
    v.extend(check_safety(&sim.safety));
    v.extend(check_rows(&sim.rows));
    v
}

/// Number of complete (EM_OFF, EM_ON) pairs in order.
pub fn em_pairs(log: &EventLog) -> usize {
    let mut pairs = 0;
    let mut off = false;
    for e in log.events() {
        match e.kind {
            EventKind::EmOff => off = true,
            EventKind::EmOn if off => {
                pairs += 1;
                off = false;
            }
            _ => {}
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::payload;

    fn phase(log: &mut EventLog, t: f64, from: &str, to: &str) {
        log.push(
            t,
            (t * 1000.0) as u64,
            EventKind::PhaseChange,
            payload([("from", from.into()), ("to", to.into())]),
        );
    }

    #[test]
    fn clean_cycle_passes() {
        let mut log = EventLog::default();
        phase(&mut log, 1.0, "TRACKING", "APPROACH");
        phase(&mut log, 2.0, "APPROACH", "DOCK_WAIT");
        log.push(3.0, 3000, EventKind::Docked, Vec::new());
        phase(&mut log, 3.1, "DOCK_WAIT", "CHARGING");
        log.push(5.0, 5000, EventKind::EmOff, Vec::new());
        phase(&mut log, 9.0, "CHARGING", "TAKEOFF_DETACH");
        log.push(10.0, 10000, EventKind::Detach, Vec::new());
        log.push(13.0, 13000, EventKind::EmOn, Vec::new());
        assert!(check_events(&log).is_empty());
        assert_eq!(em_pairs(&log), 1);
    }

    #[test]
    fn charging_without_dock_flagged() {
        let mut log = EventLog::default();
        phase(&mut log, 2.0, "DOCK_WAIT", "CHARGING");
        let v = check_events(&log);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "charging_without_dock");
    }

    #[test]
    fn illegal_transition_flagged() {
        let mut log = EventLog::default();
        log.push(0.0, 0, EventKind::Docked, Vec::new());
        phase(&mut log, 1.0, "TRACKING", "CHARGING");
        let rules: Vec<&str> = check_events(&log).iter().map(|v| v.rule).collect();
        assert_eq!(rules, vec!["illegal_transition"]);
    }

    #[test]
    fn double_em_off_flagged() {
        let mut log = EventLog::default();
        log.push(1.0, 1, EventKind::EmOff, Vec::new());
        log.push(2.0, 2, EventKind::EmOff, Vec::new());
        assert_eq!(check_events(&log)[0].rule, "em_sequence");
        assert_eq!(em_pairs(&log), 0);
    }
}
