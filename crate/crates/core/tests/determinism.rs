use autocharge_core::experiments::{run_scenario, run_sweep};
use autocharge_core::scenario::preset;
use autocharge_core::{ScenarioConfig, Simulation};

fn short(name: &str, seed: u64) -> ScenarioConfig {
    let mut cfg = preset(name).unwrap();
    cfg.seed = seed;
    cfg.duration_s = 20.0;
    cfg.stop = autocharge_core::scenario::StopCondition::Never;
    cfg
}

fn fingerprint(cfg: &ScenarioConfig, t: f64) -> (String, String, String) {
    let mut sim = Simulation::new(cfg.resolve().unwrap()).unwrap();
    sim.run_until(|_| false, t).unwrap();
    (sim.state_json(), sim.events_csv(), sim.timeseries_csv())
}

#[test]
fn same_seed_is_byte_identical() {
    for name in ["sd2s_neods_circle", "sd2s_dock_cycles"] {
        let cfg = short(name, 7);
        assert_eq!(fingerprint(&cfg, 15.0), fingerprint(&cfg, 15.0), "{name}");
    }
}

#[test]
fn seed_changes_the_noise() {
    let a = fingerprint(&short("sd2s_neods_circle", 1), 2.0);
    let b = fingerprint(&short("sd2s_neods_circle", 2), 2.0);
    assert_ne!(a.0, b.0);
}

#[test]
fn parallel_sweep_matches_serial_runs() {
    let base = short("sd2s_def_circle", 0);
    let variants = vec!["Def".to_string(), "CeraL".to_string()];
    let report = run_sweep(&base, &variants, &[3, 4], None).unwrap();
    for row in &report.rows {
        let mut cfg = base.clone();
        cfg.apply_variant(&row.variant).unwrap();
        cfg.seed = row.seed;
        let serial = run_scenario(&cfg).unwrap().row();
        assert_eq!(&serial, row);
    }
}

#[test]
fn pinned_config_reproduces_the_run() {
    let cfg = short("sd2s_ceram_circle", 11);
    let reloaded = autocharge_core::scenario::parse_config(&cfg.pinned().unwrap().to_toml()).unwrap();
    assert_eq!(fingerprint(&cfg, 5.0), fingerprint(&reloaded, 5.0));
}
