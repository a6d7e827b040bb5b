use std::fmt::Write;
use std::path::Path;

use super::runner::{create_dir, write_file, write_run_dir};
use crate::autonomy::MissionPhase;
use crate::error::SimError;
use crate::scenario::ScenarioConfig;
use crate::sim::{EventKind, EventLog, Simulation};

/// One discharge/charge cycle of the perpetual mission.
#[derive(Debug, Clone, PartialEq)]
pub struct PerpetualCycle {
    pub index: usize,
    /// Tracking (re)start, s.
    pub start: f64,
    pub low_battery: Option<f64>,
    pub charge_start: Option<f64>,
    pub charge_complete: Option<f64>,
    pub detach: Option<f64>,
    pub throttle_events: usize,
}

impl PerpetualCycle {
    pub fn flight_duration(&self) -> Option<f64> {
        self.low_battery.map(|t| t - self.start)
    }

    pub fn charge_duration(&self) -> Option<f64> {
        Some(self.charge_complete? - self.charge_start?)
    }

    pub fn complete(&self) -> bool {
        self.low_battery.is_some() && self.charge_complete.is_some() && self.detach.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerpetualReport {
    pub horizon: f64,
    pub cycles: Vec<PerpetualCycle>,
    pub retries: usize,
    pub battery_empty: usize,
    pub throttle_on: usize,
    /// Terminal voltage extremes over every tick, V.
    pub min_voltage: f64,
    pub max_voltage: f64,
    /// Largest I·R drop seen while flying, V.
    pub max_sag: f64,
    pub error: Option<String>,
}

impl PerpetualReport {
    pub fn complete_cycles(&self) -> usize {
        self.cycles.iter().filter(|c| c.complete()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("cycle,start_s,flight_s,charge_s,throttle_events,complete\n");
        let o = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.cycles {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                c.index,
                c.start,
                o(c.flight_duration()),
                o(c.charge_duration()),
                c.throttle_events,
                u8::from(c.complete())
            );
        }
        s
    }
}

/// Splits the log into tracking-start to tracking-start cycles.
pub fn perpetual_cycles(log: &EventLog) -> Vec<PerpetualCycle> {
    let mut cycles = vec![PerpetualCycle {
        index: 1,
        start: 0.0,
        low_battery: None,
        charge_start: None,
        charge_complete: None,
        detach: None,
        throttle_events: 0,
    }];
    for e in log.events() {
        let c = cycles.last_mut().expect("non-empty");
        match e.kind {
            EventKind::LowBattery => {
                c.low_battery.get_or_insert(e.t);
            }
            EventKind::ChargeStart => {
                c.charge_start.get_or_insert(e.t);
            }
            EventKind::ChargeComplete => {
                c.charge_complete.get_or_insert(e.t);
            }
            EventKind::Detach => {
                c.detach = Some(e.t);
            }
            EventKind::ThermalThrottleOn => c.throttle_events += 1,
            EventKind::PhaseChange if e.get("to") == Some(MissionPhase::Tracking.as_str()) => {
                let index = c.index + 1;
                cycles.push(PerpetualCycle {
                    index,
                    start: e.t,
                    low_battery: None,
                    charge_start: None,
                    charge_complete: None,
                    detach: None,
                    throttle_events: 0,
                });
            }
            _ => {}
        }
    }
    cycles
}

pub struct PerpetualRun {
    pub report: PerpetualReport,
    pub sim: Simulation,
}

/// Flies the full mission loop for `horizon` simulated seconds.
pub fn run_perpetual(config: &ScenarioConfig, horizon: f64) -> Result<PerpetualRun, SimError> {
    if !(horizon > 0.0) {
        return Err(SimError::invalid("horizon", "must be positive"));
    }
    let scenario = config.resolve()?;
    let r = scenario.battery.internal_resistance;
    let mut sim = Simulation::new(scenario)?;
    let (mut vmin, mut vmax, mut sag) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    let res = sim.run_until(
        |s| {
            let b = &s.world.battery;
            vmin = vmin.min(b.terminal_voltage);
            vmax = vmax.max(b.terminal_voltage);
            sag = sag.max(b.current * r);
            false
        },
        horizon,
    );
    let ev = &sim.events;
    let report = PerpetualReport {
        horizon,
        cycles: perpetual_cycles(ev),
        retries: ev.count(EventKind::DockRetry),
        battery_empty: ev.count(EventKind::BatteryEmpty),
        throttle_on: ev.count(EventKind::ThermalThrottleOn),
        min_voltage: vmin,
        max_voltage: vmax,
        max_sag: sag,
        error: res.err().map(|e| e.to_string()),
    };
    Ok(PerpetualRun { report, sim })
}

impl PerpetualRun {
    /// Voltage-versus-time trace in long format, one row per log sample.
    pub fn voltage_trace_csv(&self) -> String {
        let mut s = String::from("t_s,battery_v,battery_soc,charger_current_a,mission_phase\n");
        for r in &self.sim.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.t, r.battery_v, r.battery_soc, r.charger_current, r.mission_phase
            );
        }
        s
    }

    pub fn write(&self, out: &Path, config: &ScenarioConfig) -> Result<(), SimError> {
        create_dir(out)?;
        write_run_dir(&out.join(&config.name), config, &self.sim)?;
        write_file(&out.join("voltage_trace.csv"), &self.voltage_trace_csv())?;
        write_file(&out.join("report.csv"), &self.report.to_csv())
    }
}
