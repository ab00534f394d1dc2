//! Per-station sliding windows over a feature matrix, and z-score scaling.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    /// `window_len x input_dim`, row-major, oldest step first.
    pub window: Vec<f64>,
    pub target: f64,
    /// Matrix row of the final step.
    pub row: usize,
    pub station_id: String,
    pub date: NaiveDate,
    /// Number of leading steps filled by repeating the earliest record.
    pub padded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    pub sequences: Vec<Sequence>,
    pub window_len: usize,
    pub input_dim: usize,
}

impl SequenceSet {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> SequenceSet {
        SequenceSet {
            sequences: indices.iter().map(|&i| self.sequences[i].clone()).collect(),
            window_len: self.window_len,
            input_dim: self.input_dim,
        }
    }

    pub fn filter(&self, keep: impl Fn(&Sequence) -> bool) -> SequenceSet {
        SequenceSet {
            sequences: self.sequences.iter().filter(|s| keep(s)).cloned().collect(),
            window_len: self.window_len,
            input_dim: self.input_dim,
        }
    }

    pub fn targets(&self) -> Vec<f64> {
        self.sequences.iter().map(|s| s.target).collect()
    }
}

/// Builds one window per run of `window_len` consecutive records at each station.
///
/// The target of a window is `targets[row]` of its final record. With
/// `pad` set, records with shorter history get a window left-padded with
/// the station's earliest record. Windows whose dates are not strictly
/// increasing are skipped. Output is ordered by final-step matrix row,
/// which is chronological for a sorted table.
pub fn build_sequences(
    matrix: &FeatureMatrix,
    targets: &[f64],
    window_len: usize,
    pad: bool,
) -> Result<SequenceSet, ModelError> {
    if window_len < 1 {
        return Err(ModelError::InvalidConfig("window length must be at least 1".into()));
    }
    if targets.len() != matrix.n_rows() {
        return Err(ModelError::DimensionMismatch { expected: matrix.n_rows(), got: targets.len() });
    }
    let mut by_station: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (r, key) in matrix.rows().iter().enumerate() {
        by_station.entry(key.station_id.as_str()).or_default().push(r);
    }

    let mut sequences = Vec::new();
    let mut skipped = 0usize;
    for rows in by_station.values() {
        for end in 0..rows.len() {
            let (steps, padded): (Vec<usize>, usize) = if end + 1 >= window_len {
                (rows[end + 1 - window_len..=end].to_vec(), 0)
            } else if pad {
                let missing = window_len - (end + 1);
                let mut s = vec![rows[0]; missing];
                s.extend_from_slice(&rows[..=end]);
                (s, missing)
            } else {
                continue;
            };
            let real = &steps[padded..];
            if real.windows(2).any(|w| matrix.rows()[w[0]].date >= matrix.rows()[w[1]].date) {
                skipped += 1;
                continue;
            }
            let row = rows[end];
            let window = steps.iter().flat_map(|&r| matrix.row(r).iter().copied()).collect();
            let key = &matrix.rows()[row];
            sequences.push(Sequence {
                window,
                target: targets[row],
                row,
                station_id: key.station_id.clone(),
                date: key.date,
                padded,
            });
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} window(s) skipped: repeated dates at one station");
    }
    sequences.sort_by_key(|s| s.row);
    Ok(SequenceSet { sequences, window_len, input_dim: matrix.n_cols() })
}

/// Per-column z-score statistics (population standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Fits on `rows` of width `dim`. Zero-variance columns get unit scale.
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>, dim: usize) -> Standardizer {
        let rows: Vec<&[f64]> = rows.into_iter().collect();
        let n = rows.len().max(1) as f64;
        let mean: Vec<f64> = (0..dim).map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n).collect();
        let std = (0..dim)
            .map(|c| {
                let var = rows.iter().map(|r| (r[c] - mean[c]).powi(2)).sum::<f64>() / n;
                let s = var.sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn fit_scalar(values: &[f64]) -> Standardizer {
        Standardizer::fit(values.chunks(1), 1)
    }

    pub fn apply(&self, column: usize, value: f64) -> f64 {
        (value - self.mean[column]) / self.std[column]
    }

    pub fn invert(&self, column: usize, value: f64) -> f64 {
        value * self.std[column] + self.mean[column]
    }

    pub fn transform_matrix(&self, matrix: &FeatureMatrix) -> FeatureMatrix {
        matrix.map_values(|c, v| self.apply(c, v))
    }
}
