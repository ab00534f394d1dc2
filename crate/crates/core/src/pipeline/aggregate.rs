//! Monthly aggregates of station measurements and model estimates for plotting.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use serde::Serialize;

/// One dated value at one station.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedValue {
    pub date: NaiveDate,
    pub station_id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthlyAggregate {
    pub year: i32,
    pub month: u32,
    pub station_mean: Option<f64>,
    pub estimate_mean: Option<f64>,
    /// Measurements pooled into `station_mean`.
    pub station_n: usize,
    /// Images (distinct dates) averaged into `estimate_mean`.
    pub estimate_n: usize,
}

fn month_of(d: NaiveDate) -> (i32, u32) {
    (d.year(), d.month())
}

/// Order-independent mean.
fn stable_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Measurements: mean of every value in the month. Estimates: mean per image
/// date over station locations, then mean of those image means per month.
/// One row per month present in either series, ascending.
pub fn aggregate_monthly(measurements: &[DatedValue], estimates: &[DatedValue]) -> Vec<MonthlyAggregate> {
    let mut measured: BTreeMap<(i32, u32), Vec<f64>> = BTreeMap::new();
    for m in measurements {
        measured.entry(month_of(m.date)).or_default().push(m.value);
    }
    let mut per_image: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for e in estimates {
        per_image.entry(e.date).or_default().push(e.value);
    }
    let mut estimated: BTreeMap<(i32, u32), Vec<f64>> = BTreeMap::new();
    for (date, mut values) in per_image {
        estimated.entry(month_of(date)).or_default().push(stable_mean(&mut values));
    }

    let months: std::collections::BTreeSet<(i32, u32)> = measured.keys().chain(estimated.keys()).copied().collect();
    months
        .into_iter()
        .map(|(year, month)| {
            let mut s = measured.remove(&(year, month)).unwrap_or_default();
            let mut e = estimated.remove(&(year, month)).unwrap_or_default();
            MonthlyAggregate {
                year,
                month,
                station_n: s.len(),
                estimate_n: e.len(),
                station_mean: (!s.is_empty()).then(|| stable_mean(&mut s)),
                estimate_mean: (!e.is_empty()).then(|| stable_mean(&mut e)),
            }
        })
        .collect()
}

pub const PLOT_CSV_HEADER: &str = "year,month,station_mean,estimate_mean,station_n,estimate_n,split";

/// Plot-ready CSV; months from `boundary` (year, month) onwards are tagged `validation`.
pub fn emit_plot_data(aggregates: &[MonthlyAggregate], boundary: (i32, u32)) -> String {
    let mut out = String::from(PLOT_CSV_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for a in aggregates {
        let split = if (a.year, a.month) >= boundary { "validation" } else { "train" };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            a.year,
            a.month,
            opt(a.station_mean),
            opt(a.estimate_mean),
            a.station_n,
            a.estimate_n,
            split
        ));
    }
    out
}
