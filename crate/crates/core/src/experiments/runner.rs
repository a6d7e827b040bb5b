use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::checks::{check_run, Violation};
use super::report::{ExperimentReport, RunRow};
use crate::error::SimError;
use crate::scenario::{ScenarioConfig, StopCondition};
use crate::sim::{EventKind, RunOutcome, Simulation};

/// A finished (or aborted) simulation together with the config it ran.
pub struct RunResult {
    pub config: ScenarioConfig,
    pub sim: Simulation,
    /// Fatal diagnostic that ended the run early.
    pub error: Option<SimError>,
    pub outcome: Option<RunOutcome>,
}

impl RunResult {
    pub fn row(&self) -> RunRow {
        let ev = &self.sim.events;
        let status = match (&self.error, self.violations().first()) {
            (Some(e), _) => format!("failed: {e}"),
            (None, Some(v)) => format!("failed: invariant {} at t={}: {}", v.rule, v.t, v.detail),
            (None, None) => "ok".to_string(),
        };
        RunRow {
            variant: self.sim.scenario.variant.clone(),
            seed: self.config.seed,
            flight_time: self.sim.low_battery_time,
            rmse: self.sim.rmse.rmse(),
            captures: ev.count(EventKind::Capture),
            docks: ev.count(EventKind::Docked),
            detaches: ev.count(EventKind::Detach),
            retries: ev.count(EventKind::DockRetry),
            capture_radius: self.sim.scenario.capture_radius(),
            status,
        }
    }

    /// Event-log and safety-monitor violations.
    pub fn violations(&self) -> Vec<Violation> {
        check_run(&self.sim)
    }
}

/// Runs a scenario to its stop condition or `duration_s`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunResult, SimError> {
    let scenario = config.resolve()?;
    let mut sim = Simulation::new(scenario)?;
    let stop = config.stop;
    let res = sim.run_until(
        |s| match stop {
            StopCondition::LowBattery => s.low_battery_time.is_some(),
            StopCondition::Never => false,
        },
        config.duration_s,
    );
    let (outcome, error) = match res {
        Ok(o) => (Some(o), None),
        Err(e) => (None, Some(e)),
    };
    Ok(RunResult {
        config: config.clone(),
        sim,
        error,
        outcome,
    })
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), SimError> {
    fs::write(path, contents).map_err(|e| SimError::io(path, e))
}

pub(crate) fn create_dir(path: &Path) -> Result<(), SimError> {
    fs::create_dir_all(path).map_err(|e| SimError::io(path, e))
}

/// Writes `config.toml` (fully resolved), `timeseries.csv` and `events.csv`.
pub fn write_run_dir(dir: &Path, config: &ScenarioConfig, sim: &Simulation) -> Result<(), SimError> {
    create_dir(dir)?;
    write_file(&dir.join("config.toml"), &config.pinned()?.to_toml())?;
    write_file(&dir.join("timeseries.csv"), &sim.timeseries_csv())?;
    write_file(&dir.join("events.csv"), &sim.events_csv())?;
    Ok(())
}

/// `<variant>_seed<seed>`
pub fn run_dir_name(variant: &str, seed: u64) -> String {
    format!("{variant}_seed{seed}")
}

/// Runs every (variant, seed) pair in parallel. Failed runs become failure
/// rows; when `out` is given each run gets its own directory and the report
/// lands in `report.csv`, also when some runs failed.
pub fn run_sweep(
    base: &ScenarioConfig,
    variants: &[String],
    seeds: &[u64],
    out: Option<&Path>,
) -> Result<ExperimentReport, SimError> {
    if variants.is_empty() {
        return Err(SimError::invalid("variants", "at least one variant is required"));
    }
    if seeds.is_empty() {
        return Err(SimError::invalid("seeds", "at least one seed is required"));
    }
    let mut jobs = Vec::new();
    for v in variants {
        let mut cfg = base.clone();
        cfg.apply_variant(v)?;
        for &seed in seeds {
            let mut c = cfg.clone();
            c.seed = seed;
            jobs.push(c);
        }
    }
    // resolve once per variant up front so a bad config fails the whole sweep
    for v in variants {
        let mut cfg = base.clone();
        cfg.apply_variant(v)?;
        cfg.resolve()?;
    }

    let rows: Vec<RunRow> = jobs
        .par_iter()
        .map(|cfg| {
            let variant = cfg.variant();
            match run_scenario(cfg) {
                Ok(r) => {
                    let mut row = r.row();
                    if let Some(dir) = out {
                        if let Err(e) = write_run_dir(&dir.join(run_dir_name(&variant, cfg.seed)), cfg, &r.sim) {
                            row.status = format!("failed: {e}");
                        }
                    }
                    row
                }
                Err(e) => RunRow::failed(&variant, cfg.seed, 0.0, e),
            }
        })
        .collect();

    let order: Vec<String> = variants
        .iter()
        .map(|v| {
            let mut c = base.clone();
            let _ = c.apply_variant(v);
            c.variant()
        })
        .collect();
    let report = ExperimentReport::from_rows(rows, &order);
    if let Some(dir) = out {
        create_dir(dir)?;
        write_file(&dir.join("report.csv"), &report.to_csv())?;
    }
    Ok(report)
}
