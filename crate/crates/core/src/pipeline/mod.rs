//! End-to-end orchestration, run configuration and plot-data aggregation.

mod aggregate;
mod config;
mod extract;
mod run;

use std::fmt;

use thiserror::Error;

use crate::model::ModelError;

pub use aggregate::{aggregate_monthly, emit_plot_data, DatedValue, MonthlyAggregate, PLOT_CSV_HEADER};
pub use config::{ExtractConfig, RunConfig, ScreenVariable, ScreeningConfig, SelectionConfig, SEED_ENV};
pub use extract::{build_matchups, load_scenes, read_samples, ExtractSummary, Sample};
pub use run::{
    evaluate_snapshot, fit_final, loss_history_csv, manifest_defaults, plot_data, predictions_csv, prepare,
    run_pipeline, select_stage, split_report, write_atomic, Fitted, OutputDir, Prepared, PredictionRow, RunOutcome,
    FAILED_MARKER, MANIFEST_DEFAULT_KEYS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Extract,
    Screen,
    Features,
    Select,
    Sequence,
    Train,
    Evaluate,
    Report,
    Write,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Extract => "extract",
            Stage::Screen => "screen",
            Stage::Features => "features",
            Stage::Select => "select",
            Stage::Sequence => "sequence",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
            Stage::Write => "write",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Failure class, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Divergence,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{stage} stage failed: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub kind: ErrorKind,
    pub message: String,
}

impl PipelineError {
    /// Config errors are classed by stage; everything else is a data error.
    pub fn new(stage: Stage, message: impl Into<String>) -> Self {
        let kind = if stage == Stage::Config { ErrorKind::Config } else { ErrorKind::Data };
        PipelineError { stage, kind, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        PipelineError::new(Stage::Config, message)
    }

    pub fn from_model(stage: Stage, e: ModelError) -> Self {
        let kind = match e {
            ModelError::Diverged { .. } | ModelError::NonFiniteGradient { .. } => ErrorKind::Divergence,
            ModelError::InvalidConfig(_) => ErrorKind::Config,
            _ => ErrorKind::Data,
        };
        PipelineError { stage, kind, message: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Divergence => 4,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(PipelineError::config("x").exit_code(), 2);
        assert_eq!(PipelineError::new(Stage::Ingest, "x").exit_code(), 3);
        let e = PipelineError::from_model(Stage::Train, ModelError::Diverged { epoch: 1, step: 2 });
        assert_eq!(e.exit_code(), 4);
        assert!(e.to_string().starts_with("train stage failed"));
    }
}
