//! Metrics, time-series cross-validation and feature selection.

mod folds;
mod metrics;
mod selection;

use serde::Serialize;
use thiserror::Error;

use crate::spectra::ParameterId;

pub use folds::{time_series_folds, Fold, FoldPlan};
pub use metrics::{mae, pearson_r, r_squared, rmse, smape, MetricError};
pub use selection::{rank_candidates, select_features, FoldScorer, Ranking, Selection};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("invalid fold plan: {0}")]
    InvalidFolds(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("feature selection: {0}")]
    Selection(String),
    #[error("fold scoring: {0}")]
    Scorer(String),
}

/// Validation metrics for one parameter, one row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub parameter: ParameterId,
    pub units: &'static str,
    pub method: String,
    pub split: String,
    pub n: usize,
    /// `None` when predictions or observations are constant.
    pub r: Option<f64>,
    pub r2: Option<f64>,
    pub rmse: f64,
    pub mae: f64,
    pub smape: f64,
    pub config_digest: String,
    pub selected_features: Vec<String>,
}

pub const REPORT_CSV_HEADER: &str = "parameter,method,n,r,rmse,mae,smape";

impl EvalReport {
    pub fn compute(
        parameter: ParameterId,
        split: &str,
        observed: &[f64],
        predicted: &[f64],
        config_digest: &str,
        selected_features: Vec<String>,
    ) -> Result<Self, EvalError> {
        Ok(EvalReport {
            parameter,
            units: parameter.units(),
            method: "LSTM".into(),
            split: split.into(),
            n: observed.len(),
            r: pearson_r(observed, predicted).ok(),
            r2: r_squared(observed, predicted).ok(),
            rmse: rmse(observed, predicted)?,
            mae: mae(observed, predicted)?,
            smape: smape(observed, predicted)?,
            config_digest: config_digest.into(),
            selected_features,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Results-table row in `parameter,method,n,r,rmse,mae,smape` order.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.parameter.label(),
            self.method,
            self.n,
            opt(self.r),
            self.rmse,
            self.mae,
            self.smape
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{REPORT_CSV_HEADER}\n{}\n", self.csv_row())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_invariants_and_csv() {
        let y = [1.0, 2.0, 3.0, 4.0];
        let p = [1.1, 1.9, 3.3, 3.8];
        let r = EvalReport::compute(ParameterId::ChlA, "validation", &y, &p, "abc", vec!["B2".into()]).unwrap();
        assert!(r.rmse >= r.mae && r.mae >= 0.0);
        assert!((0.0..=200.0).contains(&r.smape));
        assert!(r.r.unwrap() <= 1.0);
        let csv = r.to_csv();
        assert!(csv.starts_with("parameter,method,n,r,rmse,mae,smape\nChl-a,LSTM,4,"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["parameter"], "chla");
    }

    #[test]
    fn constant_predictions_leave_r_empty() {
        let r = EvalReport::compute(ParameterId::SS, "validation", &[1.0, 2.0], &[1.5, 1.5], "", vec![]).unwrap();
        assert_eq!(r.r, None);
        assert!(r.csv_row().starts_with("SS,LSTM,2,,"));
    }
}
