use std::fmt::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::checks::{check_run, em_pairs, Violation};
use super::runner::{create_dir, write_file, write_run_dir};
use crate::autonomy::MissionPhase;
use crate::error::SimError;
use crate::math::Vec3;
use crate::scenario::{ScenarioConfig, StartKind};
use crate::sim::{EventKind, EventLog, Simulation};

/// Simulated time allowed per requested cycle when the config's duration is
/// shorter, s.
pub const CYCLE_BUDGET_S: f64 = 150.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRow {
    pub cycle: usize,
    /// TRACKING -> APPROACH, s.
    pub start: f64,
    pub dock: Option<f64>,
    pub detach: Option<f64>,
    pub retries: usize,
}

impl CycleRow {
    pub fn ok(&self) -> bool {
        self.dock.is_some() && self.detach.is_some() && self.retries == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DockCycleReport {
    pub requested: usize,
    pub rows: Vec<CycleRow>,
    pub captures: usize,
    pub docks: usize,
    pub detaches: usize,
    pub em_off: usize,
    pub em_on: usize,
    pub em_pairs: usize,
    pub retries: usize,
    pub deadlocks: usize,
    /// Fatal diagnostic, if the run ended early.
    pub error: Option<String>,
}

impl DockCycleReport {
    pub fn success(&self) -> bool {
        let n = self.requested;
        self.error.is_none()
            && self.deadlocks == 0
            && self.docks == n
            && self.detaches == n
            && self.em_pairs == n
            && self.rows.len() == n
            && self.rows.iter().all(CycleRow::ok)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("cycle,start_s,dock_s,detach_s,retries,status\n");
        let o = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.cycle,
                r.start,
                o(r.dock),
                o(r.detach),
                r.retries,
                if r.ok() { "ok" } else { "failed" }
            );
        }
        let _ = writeln!(
            s,
            "total,,{},{},{},captures={};em_off={};em_on={};em_pairs={};deadlocks={}{}",
            self.docks,
            self.detaches,
            self.retries,
            self.captures,
            self.em_off,
            self.em_on,
            self.em_pairs,
            self.deadlocks,
            self.error
                .as_ref()
                .map(|e| format!(";error={}", e.replace(',', ";")))
                .unwrap_or_default()
        );
        s
    }
}

/// Splits an event log into approach-to-approach cycles.
pub fn cycles_from_events(log: &EventLog) -> Vec<CycleRow> {
    let mut rows: Vec<CycleRow> = Vec::new();
    for e in log.events() {
        match e.kind {
            EventKind::PhaseChange
                if e.get("to") == Some(MissionPhase::Approach.as_str())
                    && e.get("from") == Some(MissionPhase::Tracking.as_str()) =>
            {
                rows.push(CycleRow {
                    cycle: rows.len() + 1,
                    start: e.t,
                    dock: None,
                    detach: None,
                    retries: 0,
                });
            }
            EventKind::Docked => {
                if let Some(r) = rows.last_mut() {
                    r.dock.get_or_insert(e.t);
                }
            }
            EventKind::Detach => {
                if let Some(r) = rows.last_mut() {
                    r.detach.get_or_insert(e.t);
                }
            }
            EventKind::DockRetry => {
                if let Some(r) = rows.last_mut() {
                    r.retries += 1;
                }
            }
            _ => {}
        }
    }
    rows
}

pub struct DockCycleRun {
    pub report: DockCycleReport,
    pub sim: Simulation,
}

/// Repeats the scripted attach/detach mission until `n` cycles have
/// finished (detached and the EM re-armed), or the time budget runs out.
pub fn run_dock_cycles(config: &ScenarioConfig, n: usize) -> Result<DockCycleRun, SimError> {
    if n == 0 {
        return Err(SimError::invalid("n", "must be at least 1"));
    }
    let mut sim = Simulation::new(config.resolve()?)?;
    let t_max = config.duration_s.max(n as f64 * CYCLE_BUDGET_S);
    let res = sim.run_until(
        |s| s.events.count(EventKind::EmOn) >= n && s.events.count(EventKind::Detach) >= n,
        t_max,
    );
    let error = res.err();
    let deadlocks = usize::from(matches!(error, Some(SimError::Deadlock { .. })));
    let ev = &sim.events;
    let mut rows = cycles_from_events(ev);
    rows.truncate(n);
    let report = DockCycleReport {
        requested: n,
        rows,
        captures: ev.count(EventKind::Capture),
        docks: ev.count(EventKind::Docked),
        detaches: ev.count(EventKind::Detach),
        em_off: ev.count(EventKind::EmOff),
        em_on: ev.count(EventKind::EmOn),
        em_pairs: em_pairs(ev),
        retries: ev.count(EventKind::DockRetry),
        deadlocks,
        error: error.map(|e| e.to_string()),
    };
    Ok(DockCycleRun { report, sim })
}

impl DockCycleRun {
    pub fn write(&self, out: &Path, config: &ScenarioConfig) -> Result<(), SimError> {
        create_dir(out)?;
        write_run_dir(&out.join(&config.name), config, &self.sim)?;
        write_file(&out.join("report.csv"), &self.report.to_csv())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub seed: u64,
    /// Head start relative to the connector, m.
    pub offset: Vec3,
    pub capture: Option<f64>,
    pub dock: Option<f64>,
    pub violations: Vec<Violation>,
}

/// Uniform point in the upper half-ball of `radius` around the origin.
pub fn sample_offset(seed: u64, radius: f64) -> Vec3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3);
    loop {
        let p = Vec3::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(0.0..=1.0),
        );
        if p.norm() <= 1.0 {
            return p * radius;
        }
    }
}

/// Independent DOCK_WAIT trials, each with the head released at a seeded
/// point inside `envelope_fraction` of the capture radius. Each trial runs
/// until the head docks or `t_limit` elapses.
pub fn run_dock_trials(
    config: &ScenarioConfig,
    seeds: &[u64],
    envelope_fraction: f64,
    t_limit: f64,
) -> Result<Vec<TrialRow>, SimError> {
    let base = config.resolve()?;
    let radius = base.capture_radius() * envelope_fraction;
    seeds
        .par_iter()
        .map(|&seed| {
            let offset = sample_offset(seed, radius);
            let mut cfg = config.clone();
            cfg.seed = seed;
            cfg.mission.start = StartKind::DockWait;
            cfg.mission.head_offset_m = Some([offset.x, offset.y, offset.z]);
            cfg.log_interval_s = 0.0;
            let mut sim = Simulation::new(cfg.resolve()?)?;
            sim.run_until(|s| s.events.count(EventKind::Docked) > 0, t_limit)?;
            Ok(TrialRow {
                seed,
                offset,
                capture: sim.events.first(EventKind::Capture).map(|e| e.t),
                dock: sim.events.first(EventKind::Docked).map(|e| e.t),
                violations: check_run(&sim),
            })
        })
        .collect()
}

pub fn trials_csv(rows: &[TrialRow]) -> String {
    let mut s = String::from("seed,offset_x_m,offset_y_m,offset_z_m,capture_s,dock_s\n");
    let o = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.seed,
            r.offset.x,
            r.offset.y,
            r.offset.z,
            o(r.capture),
            o(r.dock)
        );
    }
    s
}
