use std::fmt::Write;

use rayon::prelude::*;

use super::checks::{check_run, Violation};
use crate::error::SimError;
use crate::magnetics::{capture_radius, MagnetSpec};
use crate::scenario::ScenarioConfig;
use crate::sim::{EventKind, Simulation};

/// Dock, charge and detach outcome for one airframe.
#[derive(Debug, Clone, PartialEq)]
pub struct UniversalityRow {
    pub vehicle: String,
    pub cells: u32,
    pub docked: bool,
    pub charge_complete: bool,
    /// Pack voltage over cell count at CHARGE_COMPLETE, V.
    pub cell_voltage_at_complete: Option<f64>,
    pub full_cell_voltage: f64,
    pub detached: bool,
    pub violations: Vec<Violation>,
    pub error: Option<String>,
}

impl UniversalityRow {
    pub fn ok(&self) -> bool {
        self.error.is_none()
            && self.violations.is_empty()
            && self.docked
            && self.charge_complete
            && self.detached
            && self
                .cell_voltage_at_complete
                .is_some_and(|v| (v - self.full_cell_voltage).abs() <= 0.01)
    }
}

/// Runs each config until it has docked, finished charging and detached.
pub fn run_universality(configs: &[ScenarioConfig]) -> Result<Vec<UniversalityRow>, SimError> {
    configs
        .par_iter()
        .map(|cfg| {
            let scenario = cfg.resolve()?;
            let cells = scenario.battery.cells;
            let full_cell = scenario.battery.full_cell_voltage();
            let vehicle = scenario.vehicle.name.clone();
            let mut sim = Simulation::new(scenario)?;
            let res = sim.run_until(
                |s| {
                    s.events
                        .first(EventKind::ChargeComplete)
                        .is_some_and(|c| s.events.of_kind(EventKind::Detach).any(|d| d.tick >= c.tick))
                },
                cfg.duration_s,
            );
            let ev = &sim.events;
            let complete = ev.first(EventKind::ChargeComplete);
            Ok(UniversalityRow {
                vehicle,
                cells,
                docked: ev.count(EventKind::Docked) > 0,
                charge_complete: complete.is_some(),
                cell_voltage_at_complete: complete
                    .and_then(|e| e.get("voltage_v"))
                    .and_then(|v| v.parse::<f64>().ok())
                    .map(|v| v / cells as f64),
                full_cell_voltage: full_cell,
                detached: complete.is_some_and(|c| ev.of_kind(EventKind::Detach).any(|d| d.tick >= c.tick)),
                violations: check_run(&sim),
                error: res.err().map(|e| e.to_string()),
            })
        })
        .collect()
}

pub fn universality_csv(rows: &[UniversalityRow]) -> String {
    let mut s =
        String::from("vehicle,cells,docked,charge_complete,cell_voltage_v,full_cell_voltage_v,detached,status\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.vehicle,
            r.cells,
            u8::from(r.docked),
            u8::from(r.charge_complete),
            r.cell_voltage_at_complete.map(|v| v.to_string()).unwrap_or_default(),
            r.full_cell_voltage,
            u8::from(r.detached),
            if r.ok() {
                "ok".to_string()
            } else {
                r.error.clone().unwrap_or_else(|| "failed".into()).replace(',', ";")
            }
        );
    }
    s
}

/// Fitted field model of every catalogue magnet.
pub fn magnet_table_csv(config: &ScenarioConfig) -> Result<String, SimError> {
    let models = config.field_models()?;
    let mut s = String::from("magnet,mass_g,contact_pull_n,contact_force_n,decay_length_m,exponent,capture_threshold_n,residual_hold_n,capture_radius_m\n");
    for (spec, m) in MagnetSpec::catalog().iter().zip(&models) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            m.name,
            spec.mass * 1000.0,
            spec.contact_pull_force,
            m.contact_force,
            m.decay_length,
            m.exponent,
            m.capture_threshold,
            m.residual_hold_force,
            capture_radius(m)
        );
    }
    Ok(s)
}
