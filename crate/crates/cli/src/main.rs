//! `autocharge`: batch runner for the tethered-charging simulator.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use autocharge_core::experiments::{
    check_run, magnet_table_csv, run_dock_cycles, run_perpetual, run_scenario, run_sweep, write_run_dir,
    ExperimentReport, Violation, SWEEP_VARIANTS,
};
use autocharge_core::scenario::{load_config, preset, PRESETS};
use autocharge_core::ScenarioConfig;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(version, about = "Autonomous tethered-charging quadrotor simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file, or the name of a shipped preset
    config: String,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the scenario seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the physics step, s
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario to its stop condition
    Run(Common),
    /// Tether sweep over variants and seeds
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated variants (Def, NeodS, CeraM, CeraL)
        #[arg(long, value_delimiter = ',', default_values_t = SWEEP_VARIANTS.map(String::from))]
        variants: Vec<String>,
        /// Number of seeds; runs use seeds 1..=N
        #[arg(long, default_value_t = 5)]
        seeds: u64,
    },
    /// Repeated attach/detach cycles
    DockCycles {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Full mission loop over a long horizon
    Perpetual {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10.0)]
        hours: f64,
    },
    /// Fit the connector field model and print capture radii
    CalibrateMagnets(Common),
    /// List the shipped presets
    Presets,
}

fn load(common: &Common) -> Result<ScenarioConfig> {
    let path = Path::new(&common.config);
    let mut cfg = if path.exists() {
        load_config(path).with_context(|| format!("loading {}", path.display()))?
    } else if PRESETS.iter().any(|(n, _)| *n == common.config) {
        preset(&common.config)?
    } else {
        bail!("no such file or preset: {}", common.config);
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(dt) = common.dt {
        cfg.dt_s = dt;
    }
    cfg.check()?;
    Ok(cfg)
}

fn report_violations(label: &str, v: &[Violation]) -> bool {
    for x in v {
        eprintln!("{label}: invariant `{}` violated at t={}: {}", x.rule, x.t, x.detail);
    }
    v.is_empty()
}

fn print_report(r: &ExperimentReport) {
    println!(
        "{:<8} {:>3} {:>14} {:>10} {:>12} {:>10}",
        "variant", "n", "flight_s", "std", "rmse_m", "std"
    );
    for a in &r.aggregates {
        println!(
            "{:<8} {:>3} {:>14.2} {:>10.2} {:>12.4} {:>10.4}",
            a.variant, a.n, a.flight_time_mean, a.flight_time_std, a.rmse_mean, a.rmse_std
        );
    }
}

fn run(common: &Common) -> Result<bool> {
    let cfg = load(common)?;
    let r = run_scenario(&cfg)?;
    let dir = common.out.join(&cfg.name);
    write_run_dir(&dir, &cfg, &r.sim)?;
    let report = ExperimentReport::from_rows(vec![r.row()], &[]);
    std::fs::write(common.out.join("report.csv"), report.to_csv())?;
    let row = &report.rows[0];
    println!(
        "{} [{}] t={:.2}s flight={} rmse={} docks={} detaches={} -> {}",
        cfg.name,
        row.variant,
        r.sim.t(),
        row.flight_time.map_or("-".into(), |v| format!("{v:.2}s")),
        row.rmse.map_or("-".into(), |v| format!("{v:.4}m")),
        row.docks,
        row.detaches,
        dir.display()
    );
    if let Some(e) = &r.error {
        eprintln!("run aborted: {e}");
    }
    Ok(report_violations(&cfg.name, &r.violations()) && r.error.is_none())
}

fn sweep(common: &Common, variants: &[String], seeds: u64) -> Result<bool> {
    let cfg = load(common)?;
    let seed_list: Vec<u64> = (1..=seeds).collect();
    let report = run_sweep(&cfg, variants, &seed_list, Some(&common.out))?;
    print_report(&report);
    for r in report.rows.iter().filter(|r| !r.ok()) {
        eprintln!("{} seed {}: {}", r.variant, r.seed, r.status);
    }
    println!("report: {}", common.out.join("report.csv").display());
    Ok(report.all_ok())
}

fn dock_cycles(common: &Common, n: usize) -> Result<bool> {
    let cfg = load(common)?;
    let run = run_dock_cycles(&cfg, n)?;
    run.write(&common.out, &cfg)?;
    let r = &run.report;
    println!(
        "cycles {}/{} ok, docks {}, detaches {}, EM_OFF/EM_ON pairs {}, retries {}, deadlocks {}",
        r.rows.iter().filter(|c| c.ok()).count(),
        n,
        r.docks,
        r.detaches,
        r.em_pairs,
        r.retries,
        r.deadlocks
    );
    if let Some(e) = &r.error {
        eprintln!("run aborted: {e}");
    }
    let v = check_run(&run.sim);
    Ok(report_violations(&cfg.name, &v) && r.success())
}

fn perpetual(common: &Common, hours: f64) -> Result<bool> {
    let cfg = load(common)?;
    let run = run_perpetual(&cfg, hours * 3600.0)?;
    run.write(&common.out, &cfg)?;
    let r = &run.report;
    println!(
        "{:.1} h: {} complete cycles, retries {}, battery empty {}, throttle events {}, voltage [{:.3}, {:.3}] V",
        hours,
        r.complete_cycles(),
        r.retries,
        r.battery_empty,
        r.throttle_on,
        r.min_voltage,
        r.max_voltage
    );
    for c in &r.cycles {
        println!(
            "  cycle {:>2}: flight {:>8} charge {:>8} throttle {}",
            c.index,
            c.flight_duration().map_or("-".into(), |v| format!("{v:.1}s")),
            c.charge_duration().map_or("-".into(), |v| format!("{v:.1}s")),
            c.throttle_events
        );
    }
    if let Some(e) = &r.error {
        eprintln!("run aborted: {e}");
    }
    let v = check_run(&run.sim);
    Ok(report_violations(&cfg.name, &v) && r.error.is_none() && r.retries == 0 && r.battery_empty == 0)
}

fn calibrate(common: &Common) -> Result<bool> {
    let cfg = load(common)?;
    let csv = magnet_table_csv(&cfg)?;
    std::fs::create_dir_all(&common.out)?;
    let path = common.out.join("magnets.csv");
    std::fs::write(&path, &csv)?;
    print!("{csv}");
    println!("written: {}", path.display());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => run(c),
        Command::Sweep {
            common,
            variants,
            seeds,
        } => sweep(common, variants, *seeds),
        Command::DockCycles { common, n } => dock_cycles(common, *n),
        Command::Perpetual { common, hours } => perpetual(common, *hours),
        Command::CalibrateMagnets(c) => calibrate(c),
        Command::Presets => {
            for (name, _) in PRESETS {
                println!("{name}");
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
