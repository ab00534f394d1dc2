use chrono::NaiveDate;
use serde::Serialize;

use super::FeatureExpr;
use crate::spectra::MatchupTable;

/// Identifies the source record of a matrix row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RowKey {
    pub station_id: String,
    pub date: NaiveDate,
}

/// Per-feature counts of undefined values replaced by zero, plus dropped duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EvaluationLog {
    pub undefined: Vec<(String, usize)>,
    pub duplicates_dropped: Vec<String>,
}

impl EvaluationLog {
    pub fn total_undefined(&self) -> usize {
        self.undefined.iter().map(|(_, n)| n).sum()
    }
}

/// Row-major feature values aligned with a match-up table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    exprs: Vec<FeatureExpr>,
    names: Vec<String>,
    rows: Vec<RowKey>,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.exprs.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn exprs(&self) -> &[FeatureExpr] {
        &self.exprs
    }

    pub fn rows(&self) -> &[RowKey] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let m = self.n_cols();
        &self.values[r * m..(r + 1) * m]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.n_cols() + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.get(r, c)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// A matrix restricted to `columns`, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> FeatureMatrix {
        let values = (0..self.n_rows())
            .flat_map(|r| columns.iter().map(move |&c| self.get(r, c)))
            .collect();
        FeatureMatrix {
            exprs: columns.iter().map(|&c| self.exprs[c]).collect(),
            names: columns.iter().map(|&c| self.names[c].clone()).collect(),
            rows: self.rows.clone(),
            values,
        }
    }

    /// Applies `f(column, value)` to every entry.
    pub fn map_values(&self, f: impl Fn(usize, f64) -> f64) -> FeatureMatrix {
        let m = self.n_cols();
        let values = self.values.iter().enumerate().map(|(k, &v)| f(k % m, v)).collect();
        FeatureMatrix { values, ..self.clone() }
    }

    /// Rows whose index satisfies `keep`, in order.
    pub fn select_rows(&self, keep: impl Fn(usize) -> bool) -> FeatureMatrix {
        let idx: Vec<usize> = (0..self.n_rows()).filter(|&r| keep(r)).collect();
        FeatureMatrix {
            exprs: self.exprs.clone(),
            names: self.names.clone(),
            rows: idx.iter().map(|&r| self.rows[r].clone()).collect(),
            values: idx.iter().flat_map(|&r| self.row(r).iter().copied()).collect(),
        }
    }

    /// CSV export: `station_id,date,<feature names...>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("station_id,date");
        for name in &self.names {
            out.push(',');
            // names contain commas, so quote them
            out.push('"');
            out.push_str(name);
            out.push('"');
        }
        out.push('\n');
        for (r, key) in self.rows.iter().enumerate() {
            out.push_str(&crate::spectra::csv_escape(&key.station_id));
            out.push(',');
            out.push_str(&key.date.format("%Y-%m-%d").to_string());
            for v in self.row(r) {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Evaluates `exprs` on every record of `table`.
///
/// Identical expressions are evaluated once. Undefined values become 0 and
/// are counted in the returned log. Returns `None` for an empty table.
pub fn evaluate_features(
    table: &MatchupTable,
    exprs: &[FeatureExpr],
) -> Option<(FeatureMatrix, EvaluationLog)> {
    if table.is_empty() {
        return None;
    }
    let mut log = EvaluationLog::default();
    let mut unique: Vec<FeatureExpr> = Vec::with_capacity(exprs.len());
    for e in exprs {
        if unique.contains(e) {
            log.duplicates_dropped.push(e.name());
        } else {
            unique.push(*e);
        }
    }

    let m = unique.len();
    let mut undefined = vec![0usize; m];
    let mut values = Vec::with_capacity(table.len() * m);
    for record in table.records() {
        for (c, e) in unique.iter().enumerate() {
            values.push(e.evaluate(&record.spectrum).unwrap_or_else(|| {
                undefined[c] += 1;
                0.0
            }));
        }
    }
    for (e, n) in unique.iter().zip(&undefined) {
        if *n > 0 {
            log::warn!("{e}: {n} undefined value(s) replaced by 0");
            log.undefined.push((e.name(), *n));
        }
    }

    let rows = table
        .records()
        .iter()
        .map(|r| RowKey { station_id: r.station_id.clone(), date: r.date })
        .collect();
    let names = unique.iter().map(FeatureExpr::name).collect();
    Some((FeatureMatrix { exprs: unique, names, rows, values }, log))
}
