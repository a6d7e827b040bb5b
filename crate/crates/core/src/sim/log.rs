use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// One row of the time-series log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub battery_v: f64,
    pub battery_soc: f64,
    pub charger_current: f64,
    pub em_active: bool,
    pub mission_phase: &'static str,
    pub station_state: &'static str,
    pub tether_tension: f64,
    /// Tracking error at the latest control iteration, m.
    pub rmse_instant: f64,
}

pub const TIMESERIES_HEADER: &str =
    "t,x,y,z,vx,vy,vz,battery_v,battery_soc,charger_current,em_active,mission_phase,station_state,tether_tension,rmse_instant";

pub fn timeseries_csv(rows: &[LogRow]) -> String {
    let mut s = String::with_capacity(rows.len() * 160 + 200);
    s.push_str(TIMESERIES_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
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
            u8::from(r.em_active),
            r.mission_phase,
            r.station_state,
            r.tether_tension,
            r.rmse_instant
        );
    }
    s
}
