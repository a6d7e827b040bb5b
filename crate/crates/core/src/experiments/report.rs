use std::fmt::Write;

use serde::Serialize;

/// One simulation of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub variant: String,
    pub seed: u64,
    /// Start to the low-battery trigger, s; `None` if it never fired.
    pub flight_time: Option<f64>,
    /// m
    pub rmse: Option<f64>,
    pub captures: usize,
    pub docks: usize,
    pub detaches: usize,
    pub retries: usize,
    /// m
    pub capture_radius: f64,
    /// `ok` or a failure description.
    pub status: String,
}

impl RunRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn failed(variant: &str, seed: u64, capture_radius: f64, why: impl std::fmt::Display) -> Self {
        RunRow {
            variant: variant.to_string(),
            seed,
            flight_time: None,
            rmse: None,
            captures: 0,
            docks: 0,
            detaches: 0,
            retries: 0,
            capture_radius,
            status: format!("failed: {why}"),
        }
    }
}

/// Mean and sample standard deviation over the successful seeds of one
/// variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub variant: String,
    pub n: usize,
    pub flight_time_mean: f64,
    pub flight_time_std: f64,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub capture_radius: f64,
}

/// Mean and sample (n - 1) standard deviation; zero spread for one sample.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<RunRow>,
    pub aggregates: Vec<Aggregate>,
}

pub const REPORT_HEADER: &str =
    "row_type,variant,seed,n,flight_time_s,flight_time_std_s,rmse_m,rmse_std_m,captures,docks,detaches,retries,capture_radius_m,status";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentReport {
    /// Sorts rows by (variant, seed) and derives the aggregates, keeping the
    /// order in which variants first appear in `variant_order`.
    pub fn from_rows(mut rows: Vec<RunRow>, variant_order: &[String]) -> Self {
        let rank = |v: &str| variant_order.iter().position(|o| o == v).unwrap_or(usize::MAX);
        rows.sort_by(|a, b| {
            rank(&a.variant)
                .cmp(&rank(&b.variant))
                .then(a.variant.cmp(&b.variant))
                .then(a.seed.cmp(&b.seed))
        });
        let mut aggregates = Vec::new();
        let mut seen: Vec<&str> = Vec::new();
        for r in &rows {
            if !seen.contains(&r.variant.as_str()) {
                seen.push(&r.variant);
            }
        }
        for v in seen {
            let ok: Vec<&RunRow> = rows.iter().filter(|r| r.variant == v && r.ok()).collect();
            let ft: Vec<f64> = ok.iter().filter_map(|r| r.flight_time).collect();
            let rm: Vec<f64> = ok.iter().filter_map(|r| r.rmse).collect();
            let (flight_time_mean, flight_time_std) = mean_std(&ft);
            let (rmse_mean, rmse_std) = mean_std(&rm);
            aggregates.push(Aggregate {
                variant: v.to_string(),
                n: ok.len(),
                flight_time_mean,
                flight_time_std,
                rmse_mean,
                rmse_std,
                capture_radius: rows.iter().find(|r| r.variant == v).map_or(0.0, |r| r.capture_radius),
            });
        }
        ExperimentReport { rows, aggregates }
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(RunRow::ok)
    }

    pub fn aggregate(&self, variant: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.variant == variant)
    }

    /// Long-format CSV: run rows followed by one aggregate row per variant.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(REPORT_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "run,{},{},1,{},,{},,{},{},{},{},{},{}",
                r.variant,
                r.seed,
                opt(r.flight_time),
                opt(r.rmse),
                r.captures,
                r.docks,
                r.detaches,
                r.retries,
                r.capture_radius,
                r.status.replace(',', ";")
            );
        }
        for a in &self.aggregates {
            let _ = writeln!(
                s,
                "aggregate,{},,{},{},{},{},{},,,,,{},",
                a.variant, a.n, a.flight_time_mean, a.flight_time_std, a.rmse_mean, a.rmse_std, a.capture_radius
            );
        }
        s
    }
}
