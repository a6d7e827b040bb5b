use std::path::Path;

use toml::{Table, Value};

use super::schema::ScenarioConfig;
use crate::error::{ConfigError, SimError};

/// Shipped presets, selectable with `preset = "<name>"`.
pub const PRESETS: [(&str, &str); 10] = [
    ("sd2s_def_circle", include_str!("../../presets/sd2s_def_circle.toml")),
    (
        "sd2s_neods_circle",
        include_str!("../../presets/sd2s_neods_circle.toml"),
    ),
    (
        "sd2s_ceram_circle",
        include_str!("../../presets/sd2s_ceram_circle.toml"),
    ),
    (
        "sd2s_ceral_circle",
        include_str!("../../presets/sd2s_ceral_circle.toml"),
    ),
    ("sd2s_dock_trial", include_str!("../../presets/sd2s_dock_trial.toml")),
    ("sd2s_dock_cycles", include_str!("../../presets/sd2s_dock_cycles.toml")),
    ("sd2s_dock_charge", include_str!("../../presets/sd2s_dock_charge.toml")),
    ("sd2s_perpetual", include_str!("../../presets/sd2s_perpetual.toml")),
    ("nx4s_def_circle", include_str!("../../presets/nx4s_def_circle.toml")),
    ("nx4s_dock_charge", include_str!("../../presets/nx4s_dock_charge.toml")),
];

pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Numeric keys that are plain counts or identifiers.
const UNITLESS: [&str; 2] = ["seed", "cells"];

/// Recognised unit suffixes, longest first so compound units win.
const UNIT_SUFFIXES: [&str; 28] = [
    "_w_per_n1_5",
    "_rad_per_s",
    "_kg_per_m",
    "_ns_per_m",
    "_n_per_m",
    "_k_per_a2",
    "_j_per_k",
    "_per_s2",
    "_per_s",
    "_kg_m2",
    "_mps2",
    "_degc",
    "_frac",
    "_ratio",
    "_mah",
    "_ohm",
    "_mps",
    "_deg",
    "_kg",
    "_hz",
    "_g",
    "_m",
    "_v",
    "_s",
    "_n",
    "_a",
    "_c",
    "_w",
];

fn has_unit_suffix(key: &str) -> bool {
    UNIT_SUFFIXES.iter().any(|s| key.len() > s.len() && key.ends_with(s))
}

fn is_numeric(v: &Value) -> bool {
    match v {
        Value::Integer(_) | Value::Float(_) => true,
        Value::Array(a) => !a.is_empty() && a.iter().all(is_numeric),
        _ => false,
    }
}

fn check_units(table: &Table, prefix: &str) -> Result<(), String> {
    for (key, value) in table {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match value {
            Value::Table(t) => check_units(t, &path)?,
            v if is_numeric(v) && !UNITLESS.contains(&key.as_str()) && !has_unit_suffix(key) => return Err(path),
            _ => {}
        }
    }
    Ok(())
}

/// Overlays `top` onto `base`, merging nested tables key by key.
fn deep_merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => deep_merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// 1-based line of a dotted key in `src`, found by walking table headers.
pub(crate) fn locate(src: &str, key_path: &str) -> Option<usize> {
    let mut parts: Vec<&str> = key_path.split('.').collect();
    let leaf = parts.pop()?;
    let leaf = leaf.split('[').next().unwrap_or(leaf);
    let section = parts.join(".");
    let mut current = String::new();
    let mut header_line = None;
    for (i, line) in src.lines().enumerate() {
        let l = line.trim();
        if let Some(h) = l.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = h.trim().to_string();
            if current == section && !leaf.is_empty() {
                header_line = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = l.split_once('=') {
                if k.trim().trim_matches('"') == leaf {
                    return Some(i + 1);
                }
            }
        }
    }
    header_line
}

fn parse_table(src: &str, origin: &str) -> Result<Table, ConfigError> {
    src.parse::<Table>().map_err(|e| {
        let line = e.span().map(|s| src[..s.start].lines().count().max(1));
        ConfigError::new(origin, e.message().to_string()).with_line(line)
    })
}

/// Reads a scenario from TOML text: applies its preset, checks unit
/// suffixes and key names, and fills defaults.
pub fn parse_config(src: &str) -> Result<ScenarioConfig, ConfigError> {
    let user = parse_table(src, "<toml>")?;
    check_units(&user, "").map_err(|path| {
        ConfigError::new(path.clone(), "missing unit suffix (e.g. `_m`, `_g`, `_s`)").with_line(locate(src, &path))
    })?;

    let mut merged = match user.get("preset") {
        Some(Value::String(name)) => {
            let base = preset_source(name).ok_or_else(|| {
                let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                ConfigError::new(
                    "preset",
                    format!("unknown preset `{name}` (known: {})", known.join(", ")),
                )
                .with_line(locate(src, "preset"))
            })?;
            let mut t = parse_table(base, name)?;
            t.remove("preset");
            t
        }
        Some(_) => return Err(ConfigError::new("preset", "must be a string").with_line(locate(src, "preset"))),
        None => Table::new(),
    };
    deep_merge(&mut merged, user);

    let config: ScenarioConfig = serde_path_to_error::deserialize(Value::Table(merged)).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let line = locate(src, &path);
        ConfigError::new(path, inner).with_line(line)
    })?;
    config.check().map_err(|e| {
        let line = locate(src, &e.key_path);
        e.with_line(line)
    })?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, SimError> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    Ok(parse_config(&src)?)
}

/// A preset by name, fully parsed.
pub fn preset(name: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config(&format!("preset = \"{name}\"\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_resolves() {
        for (name, _) in PRESETS {
            let c = preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            c.resolve().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn default_preset_matches_builtin_defaults() {
        let c = preset("sd2s_def_circle").unwrap();
        assert_eq!(c.vehicle.mass_g, 250.0);
        assert_eq!(c.battery.capacity_mah, 910.0);
        assert!(!c.tether.enabled);
        assert_eq!(c.trajectory.radius_m, 1.0);
        assert_eq!(c.trajectory.speed_mps, 2.0);
    }

    #[test]
    fn omitted_dt_defaults_to_one_millisecond() {
        let c = parse_config("name = \"x\"\n").unwrap();
        assert_eq!(c.dt_s, 0.001);
        assert!(c.to_toml().contains("dt_s = 0.001"));
    }

    #[test]
    fn negative_mass_names_the_field_and_line() {
        let src = "name = \"x\"\n\n[vehicle]\nmass_g = -5.0\n";
        let e = parse_config(src).unwrap_err();
        assert_eq!(e.key_path, "vehicle.mass_g");
        assert_eq!(e.line, Some(4));
    }

    #[test]
    fn unknown_key_rejected() {
        let src = "[tether]\nlength_m = 0.5\ncolour_m = 1.0\n";
        let e = parse_config(src).unwrap_err();
        assert!(e.key_path.starts_with("tether"), "{e}");
        assert!(e.message.contains("colour_m"), "{e}");
    }

    #[test]
    fn missing_unit_suffix_rejected() {
        let src = "[tether]\nlength = 0.5\n";
        let e = parse_config(src).unwrap_err();
        assert_eq!(e.key_path, "tether.length");
        assert!(e.message.contains("unit"));
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn user_keys_override_preset() {
        let src = "preset = \"sd2s_ceral_circle\"\nseed = 9\n[tether]\nlength_m = 0.4\n";
        let c = parse_config(src).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.tether.length_m, 0.4);
        assert_eq!(c.tether.magnet, "CeraL");
    }

    #[test]
    fn echo_round_trips() {
        let c = preset("sd2s_perpetual").unwrap();
        let back = parse_config(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_preset_rejected() {
        let e = parse_config("preset = \"nope\"\n").unwrap_err();
        assert_eq!(e.key_path, "preset");
    }
}
