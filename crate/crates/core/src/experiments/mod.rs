//! Batch experiments: tether sweeps, dock cycles, docking trials, perpetual
//! flight and multi-vehicle runs, with CSV reports and log cross-checks.

pub mod checks;
pub mod docking;
pub mod perpetual;
pub mod report;
pub mod runner;
pub mod universality;

pub use checks::{check_events, check_rows, check_run, check_safety, em_pairs, Violation};
pub use docking::{
    cycles_from_events, run_dock_cycles, run_dock_trials, sample_offset, trials_csv, CycleRow, DockCycleReport,
    DockCycleRun, TrialRow,
};
pub use perpetual::{perpetual_cycles, run_perpetual, PerpetualCycle, PerpetualReport, PerpetualRun};
pub use report::{mean_std, Aggregate, ExperimentReport, RunRow, REPORT_HEADER};
pub use runner::{run_dir_name, run_scenario, run_sweep, write_run_dir, RunResult};
pub use universality::{magnet_table_csv, run_universality, universality_csv, UniversalityRow};

/// Report variants of the tether sweep, lightest first.
pub const SWEEP_VARIANTS: [&str; 4] = ["Def", "NeodS", "CeraM", "CeraL"];
