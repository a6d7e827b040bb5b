use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn autocharge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autocharge"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn lists_presets() {
    let o = autocharge(&["presets"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "sd2s_perpetual"));
}

#[test]
fn calibrate_magnets_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = autocharge(&[
        "calibrate-magnets",
        "sd2s_def_circle",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("magnets.csv")).unwrap();
    let radius = |name: &str| -> f64 {
        let line = csv.lines().find(|l| l.starts_with(name)).unwrap();
        line.rsplit(',').next().unwrap().parse().unwrap()
    };
    assert!((radius("CeraL") / radius("NeodS") - 5.0).abs() < 0.25);
}

#[test]
fn run_writes_config_timeseries_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = autocharge(&["run", "sd2s_dock_trial", "--out", out, "--seed", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let run = dir.path().join("sd2s_dock_trial");
    for f in ["config.toml", "timeseries.csv", "events.csv"] {
        assert!(run.join(f).is_file(), "{f}");
    }
    assert!(fs::read_to_string(run.join("config.toml"))
        .unwrap()
        .contains("seed = 9"));
    assert!(fs::read_to_string(run.join("events.csv")).unwrap().contains("DOCKED"));
    assert!(dir.path().join("report.csv").is_file());
}

#[test]
fn echoed_config_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(autocharge(&["run", "sd2s_dock_trial", "--out", a.to_str().unwrap()])
        .status
        .success());
    let echoed = a.join("sd2s_dock_trial").join("config.toml");
    assert!(
        autocharge(&["run", echoed.to_str().unwrap(), "--out", b.to_str().unwrap()])
            .status
            .success()
    );
    for f in ["timeseries.csv", "events.csv"] {
        assert_eq!(
            fs::read(a.join("sd2s_dock_trial").join(f)).unwrap(),
            fs::read(b.join("sd2s_dock_trial").join(f)).unwrap()
        );
    }
}

#[test]
fn sweep_writes_one_directory_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "short.toml",
        "preset = \"sd2s_def_circle\"\nduration_s = 200.0\n\n[battery]\ninitial_soc_frac = 0.12\n",
    );
    let out = dir.path().join("out");
    let o = autocharge(&[
        "sweep",
        &cfg,
        "--variants",
        "Def,CeraL",
        "--seeds",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for run in ["Def_seed1", "Def_seed2", "CeraL_seed1", "CeraL_seed2"] {
        assert!(out.join(run).join("events.csv").is_file(), "{run}");
    }
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(report.lines().filter(|l| l.starts_with("aggregate,")).count(), 2);
}

#[test]
fn dock_cycles_reports_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let o = autocharge(&[
        "dock-cycles",
        "sd2s_dock_cycles",
        "--n",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("EM_OFF/EM_ON pairs 2"));
}

#[test]
fn invalid_config_names_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "name = \"bad\"\n\n[vehicle]\nmass_g = -5.0\n");
    let o = autocharge(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("vehicle.mass_g") && err.contains("line 4"), "{err}");
}

#[test]
fn unknown_config_fails() {
    let o = autocharge(&["run", "no_such_preset"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dt_override_is_validated() {
    let o = autocharge(&["run", "sd2s_dock_trial", "--dt", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dt_s"));
}
