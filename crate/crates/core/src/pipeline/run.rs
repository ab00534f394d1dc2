//! Stage functions and the full `run` flow.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::{aggregate_monthly, emit_plot_data, DatedValue, PipelineError, RunConfig, ScreenVariable, Stage};
use crate::evaluation::{rmse, select_features, time_series_folds, EvalError, EvalReport, FoldPlan, Selection};
use crate::features::{enumerate_candidates, evaluate_features, parse_feature, EvaluationLog, FeatureExpr, FeatureMatrix};
use crate::model::{
    build_sequences, predict, train, LstmModel, ModelError, ModelSnapshot, Sequence, SequenceSet, Standardizer, TrainConfig,
};
use crate::screening::{screen_target, FenceResult};
use crate::spectra::{csv_escape, ingest_matchup_table, split_by_year, BandId, MatchupTable, NegativePolicy};

/// Marker file left in the output directory when a run fails.
pub const FAILED_MARKER: &str = ".failed";

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

#[derive(Debug, Clone)]
pub struct OutputDir {
    path: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(path: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(path)
            .map_err(|e| PipelineError::new(Stage::Write, format!("cannot create {}: {e}", path.display())))?;
        Ok(OutputDir { path: path.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Names written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, PipelineError> {
        let path = self.path.join(name);
        write_atomic(&path, bytes)
            .map_err(|e| PipelineError::new(Stage::Write, format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn mark_failed(&self, error: &PipelineError) {
        let path = self.path.join(FAILED_MARKER);
        if let Err(e) = write_atomic(&path, format!("{error}\n").as_bytes()) {
            log::error!("cannot write failure marker {}: {e}", path.display());
        }
    }

    pub fn clear_failed(&self) {
        let _ = fs::remove_file(self.path.join(FAILED_MARKER));
    }
}

/// Ingested, split and screened data for one target parameter.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub config_digest: String,
    pub input_digest: String,
    pub ingested_rows: usize,
    pub missing_target: usize,
    pub fences: Option<FenceResult>,
    /// Screened training records plus validation records, chronological.
    pub table: MatchupTable,
    pub is_train: Vec<bool>,
    pub target: Vec<f64>,
}

impl Prepared {
    pub fn train_rows(&self) -> usize {
        self.is_train.iter().filter(|t| **t).count()
    }

    /// Candidate expressions: the configured list or the full enumeration.
    pub fn candidates(&self) -> Result<Vec<FeatureExpr>, PipelineError> {
        match &self.config.selection.candidates {
            None => Ok(enumerate_candidates()),
            Some(names) => names
                .iter()
                .map(|n| parse_feature(n).map_err(|e| PipelineError::config(format!("candidate `{n}`: {e}"))))
                .collect(),
        }
    }

    pub fn feature_matrix(&self, exprs: &[FeatureExpr]) -> Result<(FeatureMatrix, EvaluationLog), PipelineError> {
        evaluate_features(&self.table, exprs)
            .ok_or_else(|| PipelineError::new(Stage::Features, "no records left to evaluate features on"))
    }
}

/// Validates, ingests, splits by year and screens the training years.
pub fn prepare(config: &RunConfig) -> Result<Prepared, PipelineError> {
    config.validate()?;
    let param = config.parameter;
    let raw = ingest_matchup_table(&config.matchup_csv, &config.ingest)
        .map_err(|e| PipelineError::new(Stage::Ingest, e.to_string()))?;
    log::info!("ingested {} record(s) from {}", raw.len(), config.matchup_csv.display());
    let present = raw.filtered(|r| r.target(param).is_some());
    let missing_target = raw.len() - present.len();
    let (train, validation) =
        split_by_year(&present, config.split_year).map_err(|e| PipelineError::new(Stage::Ingest, e.to_string()))?;

    let (train, fences) = match config.screening.variable {
        ScreenVariable::Target => {
            let outcome = screen_target(&train, param, config.screening.k)
                .map_err(|e| PipelineError::new(Stage::Screen, e.to_string()))?;
            log::info!(
                "screening removed {} of {} training record(s)",
                outcome.fences.rejected.len(),
                train.len()
            );
            (outcome.kept, Some(outcome.fences))
        }
        ScreenVariable::None => (train, None),
    };

    let records = train.records().iter().chain(validation.records()).cloned().collect();
    let table = MatchupTable::from_records(records, raw.provenance.digest.clone());
    let is_train = table.records().iter().map(|r| r.year() < config.split_year).collect();
    let target = table.records().iter().map(|r| r.target(param).expect("filtered on target")).collect();
    Ok(Prepared {
        config: config.clone(),
        config_digest: config.digest(),
        input_digest: raw.provenance.digest.clone(),
        ingested_rows: raw.len(),
        missing_target,
        fences,
        table,
        is_train,
        target,
    })
}

/// Copies `set` keeping only `columns` of each step, standardised by `scale`,
/// with targets standardised by `target_scale`.
fn project(set: &SequenceSet, columns: &[usize], scale: &Standardizer, target_scale: &Standardizer) -> SequenceSet {
    let dim = set.input_dim;
    let sequences = set
        .sequences
        .iter()
        .map(|s| Sequence {
            window: s
                .window
                .chunks(dim)
                .flat_map(|step| columns.iter().enumerate().map(move |(j, &c)| scale.apply(j, step[c])))
                .collect(),
            target: target_scale.apply(0, s.target),
            ..s.clone()
        })
        .collect();
    SequenceSet { sequences, window_len: set.window_len, input_dim: columns.len() }
}

fn fold_config(config: &RunConfig, fold: usize) -> TrainConfig {
    TrainConfig {
        epochs: config.selection.epochs.unwrap_or(config.train.epochs),
        seed: config.train.seed.wrapping_add(fold as u64),
        ..config.train.clone()
    }
}

/// Mean validation RMSE (target units) over the folds, one fresh model per fold.
fn fold_rmse(
    config: &RunConfig,
    matrix: &FeatureMatrix,
    sequences: &SequenceSet,
    columns: &[usize],
    plan: &FoldPlan,
    diverged: &Mutex<Option<ModelError>>,
) -> Result<f64, EvalError> {
    let mut scores = plan
        .folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let fit_part = sequences.subset(&fold.train.clone().collect::<Vec<_>>());
            let test_part = sequences.subset(&fold.test.clone().collect::<Vec<_>>());
            let rows: Vec<Vec<f64>> = fit_part
                .sequences
                .iter()
                .map(|s| columns.iter().map(|&c| matrix.get(s.row, c)).collect())
                .collect();
            let scale = Standardizer::fit(rows.iter().map(Vec::as_slice), columns.len());
            let target_scale = Standardizer::fit_scalar(&fit_part.targets());
            let cfg = fold_config(config, f);
            let mut model = LstmModel::new(columns.len(), cfg.hidden_dim, cfg.dropout_rate, cfg.seed)
                .map_err(|e| EvalError::Scorer(e.to_string()))?;
            train(&mut model, &project(&fit_part, columns, &scale, &target_scale), &cfg).map_err(|e| {
                if matches!(e, ModelError::Diverged { .. } | ModelError::NonFiniteGradient { .. }) {
                    diverged.lock().expect("lock").get_or_insert(e.clone());
                }
                EvalError::Scorer(format!("fold {f}: {e}"))
            })?;
            let predicted: Vec<f64> = predict(&model, &project(&test_part, columns, &scale, &target_scale))
                .map_err(|e| EvalError::Scorer(e.to_string()))?
                .into_iter()
                .map(|p| target_scale.invert(0, p))
                .collect();
            Ok(rmse(&test_part.targets(), &predicted)?)
        })
        .collect::<Result<Vec<f64>, EvalError>>()?;
    scores.sort_by(f64::total_cmp);
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Ranks candidates on the training split and picks the subset size by
/// time-ordered cross-validation over training sequences.
pub fn select_stage(prep: &Prepared, matrix: &FeatureMatrix) -> Result<Selection, PipelineError> {
    let err = |m: String| PipelineError::new(Stage::Select, m);
    let cfg = &prep.config;
    let train_matrix = matrix.select_rows(|r| prep.is_train[r]);
    let train_target: Vec<f64> =
        prep.target.iter().zip(&prep.is_train).filter(|(_, t)| **t).map(|(v, _)| *v).collect();
    let sequences = build_sequences(&train_matrix, &train_target, cfg.train.window_len, cfg.train.pad_windows)
        .map_err(|e| PipelineError::from_model(Stage::Sequence, e))?;
    let plan = time_series_folds(sequences.len(), cfg.selection.folds).map_err(|e| err(e.to_string()))?;
    let diverged = Mutex::new(None);
    let scorer =
        |columns: &[usize], plan: &FoldPlan| fold_rmse(cfg, &train_matrix, &sequences, columns, plan, &diverged);
    let selection = select_features(
        &train_matrix,
        &train_target,
        (cfg.selection.k_min, cfg.selection.k_max),
        &plan,
        &scorer,
    )
    .map_err(|e| match diverged.lock().expect("lock").take() {
        Some(model_error) => PipelineError::from_model(Stage::Select, model_error),
        None => err(e.to_string()),
    })?;
    log::info!("selected {} feature(s): {}", selection.names.len(), selection.names.join(", "));
    Ok(selection)
}

/// A trained model and its per-epoch training loss.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub snapshot: ModelSnapshot,
    pub loss_history: Vec<f64>,
    pub train_sequences: usize,
}

/// Trains the final model on every training-year sequence using the named features.
pub fn fit_final(prep: &Prepared, feature_names: &[String]) -> Result<Fitted, PipelineError> {
    let cfg = &prep.config.train;
    let exprs: Vec<FeatureExpr> = feature_names
        .iter()
        .map(|n| parse_feature(n).map_err(|e| PipelineError::new(Stage::Train, format!("feature `{n}`: {e}"))))
        .collect::<Result<_, _>>()?;
    let (matrix, _) = prep.feature_matrix(&exprs)?;
    let train_rows: Vec<&[f64]> = (0..matrix.n_rows()).filter(|&r| prep.is_train[r]).map(|r| matrix.row(r)).collect();
    let scale = Standardizer::fit(train_rows, matrix.n_cols());
    let train_targets: Vec<f64> =
        prep.target.iter().zip(&prep.is_train).filter(|(_, t)| **t).map(|(v, _)| *v).collect();
    let target_scale = Standardizer::fit_scalar(&train_targets);

    let z = scale.transform_matrix(&matrix);
    let zt: Vec<f64> = prep.target.iter().map(|&v| target_scale.apply(0, v)).collect();
    let set = build_sequences(&z, &zt, cfg.window_len, cfg.pad_windows)
        .map_err(|e| PipelineError::from_model(Stage::Sequence, e))?;
    let train_set = set.filter(|s| prep.is_train[s.row]);
    let mut model = LstmModel::new(matrix.n_cols(), cfg.hidden_dim, cfg.dropout_rate, cfg.seed)
        .map_err(|e| PipelineError::from_model(Stage::Train, e))?;
    let loss_history = train(&mut model, &train_set, cfg).map_err(|e| PipelineError::from_model(Stage::Train, e))?;
    log::info!(
        "trained on {} sequence(s), final loss {:.6}",
        train_set.len(),
        loss_history.last().copied().unwrap_or(f64::NAN)
    );
    Ok(Fitted {
        snapshot: ModelSnapshot::new(model, cfg.clone(), matrix.names().to_vec(), scale, target_scale),
        loss_history,
        train_sequences: train_set.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRow {
    pub station_id: String,
    pub date: NaiveDate,
    pub split: &'static str,
    pub observed: f64,
    pub predicted: f64,
}

/// Predictions in target units for every record that has a complete window.
pub fn evaluate_snapshot(snapshot: &ModelSnapshot, prep: &Prepared) -> Result<Vec<PredictionRow>, PipelineError> {
    let m = &snapshot.manifest;
    let exprs: Vec<FeatureExpr> = m
        .feature_names
        .iter()
        .map(|n| parse_feature(n).map_err(|e| PipelineError::new(Stage::Evaluate, format!("feature `{n}`: {e}"))))
        .collect::<Result<_, _>>()?;
    let (matrix, _) = prep.feature_matrix(&exprs)?;
    if matrix.n_cols() != m.input_dim {
        return Err(PipelineError::new(
            Stage::Evaluate,
            format!("snapshot expects {} features, got {}", m.input_dim, matrix.n_cols()),
        ));
    }
    let z = m.feature_scaling.transform_matrix(&matrix);
    let zt: Vec<f64> = prep.target.iter().map(|&v| m.target_scaling.apply(0, v)).collect();
    let set = build_sequences(&z, &zt, m.config.window_len, m.config.pad_windows)
        .map_err(|e| PipelineError::from_model(Stage::Sequence, e))?;
    let predicted = predict(&snapshot.model, &set).map_err(|e| PipelineError::from_model(Stage::Evaluate, e))?;
    Ok(set
        .sequences
        .iter()
        .zip(predicted)
        .map(|(s, p)| PredictionRow {
            station_id: s.station_id.clone(),
            date: s.date,
            split: if prep.is_train[s.row] { "train" } else { "validation" },
            observed: prep.target[s.row],
            predicted: m.target_scaling.invert(0, p),
        })
        .collect())
}

/// Metrics over the prediction rows of one split.
pub fn split_report(
    prep: &Prepared,
    rows: &[PredictionRow],
    split: &str,
    features: &[String],
) -> Result<EvalReport, PipelineError> {
    let (observed, predicted): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.split == split).map(|r| (r.observed, r.predicted)).unzip();
    EvalReport::compute(prep.config.parameter, split, &observed, &predicted, &prep.config_digest, features.to_vec())
        .map_err(|e| PipelineError::new(Stage::Evaluate, format!("{split} split: {e}")))
}

pub fn predictions_csv(rows: &[PredictionRow]) -> String {
    let mut out = String::from("station_id,date,split,observed,predicted\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_escape(&r.station_id),
            r.date.format("%Y-%m-%d"),
            r.split,
            r.observed,
            r.predicted
        ));
    }
    out
}

pub fn loss_history_csv(history: &[f64]) -> String {
    let mut out = String::from("epoch,loss\n");
    for (e, l) in history.iter().enumerate() {
        out.push_str(&format!("{e},{l}\n"));
    }
    out
}

/// Monthly plot data of station measurements against estimates at station locations.
pub fn plot_data(prep: &Prepared, rows: &[PredictionRow]) -> String {
    let measured: Vec<DatedValue> = prep
        .table
        .records()
        .iter()
        .zip(&prep.target)
        .map(|(r, &v)| DatedValue { date: r.date, station_id: r.station_id.clone(), value: v })
        .collect();
    let estimated: Vec<DatedValue> = rows
        .iter()
        .map(|r| DatedValue { date: r.date, station_id: r.station_id.clone(), value: r.predicted })
        .collect();
    emit_plot_data(&aggregate_monthly(&measured, &estimated), (prep.config.split_year, 1))
}

/// Keys of the `defaults` manifest section; each is a behaviour the run depends on.
pub const MANIFEST_DEFAULT_KEYS: &[&str] = &[
    "adam_beta1",
    "adam_beta2",
    "adam_epsilon",
    "band_wavelengths_nm",
    "batch_size",
    "buffer_radius_m",
    "decay_rate",
    "dropout_placement",
    "dropout_rate",
    "epochs",
    "excluded_bands",
    "fence_inclusive",
    "fold_seed",
    "forget_gate_bias_init",
    "hidden_dim",
    "initial_state",
    "k_tie_break",
    "learning_rate",
    "learning_rate_schedule",
    "loss",
    "max_day_gap",
    "min_land_distance_m",
    "mndwi_water_threshold",
    "negative_reflectance",
    "normalization",
    "nr_pairs",
    "pad_windows",
    "quantile_method",
    "screened_variable",
    "seed",
    "selection_epochs",
    "selection_folds",
    "selection_k_range",
    "selection_ranking",
    "sequence_construction",
    "smape",
    "split_year",
    "temporal_tie_break",
    "three_band_triples",
    "tukey_k",
    "undefined_feature_value",
    "weight_init",
    "window_len",
];

pub fn manifest_defaults(config: &RunConfig) -> Value {
    let t = &config.train;
    let negative = match config.ingest.negative {
        NegativePolicy::ClampNearZero { tolerance } => format!("clamp values in [-{tolerance}, 0) to 0, reject below"),
        NegativePolicy::Reject => "reject".into(),
        NegativePolicy::Allow => "allow".into(),
    };
    let wavelengths: serde_json::Map<String, Value> =
        BandId::ALL.iter().map(|b| (b.name().to_string(), json!(b.central_wavelength_nm()))).collect();
    let entries: Vec<(&str, Value)> = vec![
        ("adam_beta1", json!(t.beta1)),
        ("adam_beta2", json!(t.beta2)),
        ("adam_epsilon", json!(t.epsilon)),
        ("band_wavelengths_nm", json!(wavelengths)),
        ("batch_size", json!(t.batch_size)),
        ("buffer_radius_m", json!(config.extract.buffer_radius_m)),
        ("decay_rate", json!(t.decay_rate)),
        ("dropout_placement", json!("inverted dropout on the final hidden state before the output layer, training only")),
        ("dropout_rate", json!(t.dropout_rate)),
        ("epochs", json!(t.epochs)),
        ("excluded_bands", json!(["B8", "B9", "B10"])),
        ("fence_inclusive", json!(true)),
        ("fold_seed", json!("seed + fold index")),
        ("forget_gate_bias_init", json!(1.0)),
        ("hidden_dim", json!(t.hidden_dim)),
        ("initial_state", json!("zeros")),
        ("k_tie_break", json!("fewest features")),
        ("learning_rate", json!(t.learning_rate)),
        ("learning_rate_schedule", json!("learning_rate * decay_rate^epoch, epoch counted from 0")),
        ("loss", json!("mean squared error")),
        ("max_day_gap", json!(1)),
        ("min_land_distance_m", json!(config.extract.min_land_distance_m)),
        ("mndwi_water_threshold", json!("mndwi > 0")),
        ("negative_reflectance", json!(negative)),
        ("normalization", json!("z-score per feature and target from training-year statistics")),
        ("nr_pairs", json!("ordered")),
        ("pad_windows", json!(t.pad_windows)),
        ("quantile_method", json!("linear interpolation at (n - 1) p")),
        ("screened_variable", json!(config.screening.variable)),
        ("seed", json!(t.seed)),
        ("selection_epochs", json!(config.selection.epochs.unwrap_or(t.epochs))),
        ("selection_folds", json!(config.selection.folds)),
        ("selection_k_range", json!([config.selection.k_min, config.selection.k_max])),
        ("selection_ranking", json!("|pearson r| on the training split; constant and exactly collinear columns skipped")),
        ("sequence_construction", json!("per station, chronological, window_len records ending at the target record")),
        ("smape", json!("mean of 2|y - p| / (|y| + |p|) in percent, 0 when both are 0")),
        ("split_year", json!(config.split_year)),
        ("temporal_tie_break", json!("earlier scene")),
        ("three_band_triples", json!("consecutive in retained band order")),
        ("tukey_k", json!(config.screening.k)),
        ("undefined_feature_value", json!(0.0)),
        ("weight_init", json!("glorot uniform per gate block, zero biases except forget gate")),
        ("window_len", json!(t.window_len)),
    ];
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub validation: EvalReport,
    pub train: EvalReport,
    pub selection: Selection,
    pub loss_history: Vec<f64>,
    pub output_dir: PathBuf,
    pub artifacts: Vec<String>,
}

/// Runs every stage and writes the artifacts. Config problems are reported
/// before anything is computed or written.
pub fn run_pipeline(config: &RunConfig) -> Result<RunOutcome, PipelineError> {
    config.validate()?;
    let mut out = OutputDir::create(&config.output_dir)?;
    match run_stages(config, &mut out) {
        Ok(outcome) => {
            out.clear_failed();
            Ok(outcome)
        }
        Err(e) => {
            log::error!("{e}");
            out.mark_failed(&e);
            Err(e)
        }
    }
}

fn run_stages(config: &RunConfig, out: &mut OutputDir) -> Result<RunOutcome, PipelineError> {
    let prep = prepare(config)?;
    let exprs = prep.candidates()?;
    let (matrix, eval_log) = prep.feature_matrix(&exprs)?;
    let selection = select_stage(&prep, &matrix)?;
    let fitted = fit_final(&prep, &selection.names)?;
    let rows = evaluate_snapshot(&fitted.snapshot, &prep)?;
    let validation = split_report(&prep, &rows, "validation", &selection.names)?;
    let train_report = split_report(&prep, &rows, "train", &selection.names)?;

    out.write("model.lstm", &fitted.snapshot.to_bytes())?;
    out.write("report.json", validation.to_json().as_bytes())?;
    out.write("report.csv", validation.to_csv().as_bytes())?;
    out.write("selected_features.txt", format!("{}\n", selection.names.join("\n")).as_bytes())?;
    out.write("selection.json", pretty(&selection).as_bytes())?;
    out.write("loss_history.csv", loss_history_csv(&fitted.loss_history).as_bytes())?;
    out.write("predictions.csv", predictions_csv(&rows).as_bytes())?;
    out.write("plot_data.csv", plot_data(&prep, &rows).as_bytes())?;

    let mut artifacts = out.written().to_vec();
    artifacts.push("manifest.json".into());
    let validation_sequences = rows.iter().filter(|r| r.split == "validation").count();
    let manifest = json!({
        "tool": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "config": config,
        "config_digest": prep.config_digest,
        "input": {
            "matchup_csv": config.matchup_csv,
            "sha256": prep.input_digest,
            "rows": prep.ingested_rows,
        },
        "counts": {
            "missing_target": prep.missing_target,
            "screened_out": prep.fences.as_ref().map_or(0, |f| f.rejected.len()),
            "train_records": prep.train_rows(),
            "validation_records": prep.table.len() - prep.train_rows(),
            "train_sequences": fitted.train_sequences,
            "validation_sequences": validation_sequences,
            "candidates": matrix.n_cols(),
            "undefined_feature_values": eval_log.total_undefined(),
        },
        "screening": prep.fences.as_ref().map(|f| json!({
            "q1": f.q1,
            "q3": f.q3,
            "lower_fence": f.lower_fence,
            "upper_fence": f.upper_fence,
            "k": f.k,
        })),
        "undefined_features": eval_log.undefined,
        "selection": {
            "selected": selection.names,
            "scores": selection.scores,
            "constant": selection.ranking.constant,
            "collinear": selection.ranking.collinear,
        },
        "training": {
            "epochs_run": fitted.loss_history.len(),
            "final_loss": fitted.loss_history.last(),
        },
        "metrics": { "train": train_report, "validation": validation },
        "defaults": manifest_defaults(config),
        "artifacts": artifacts,
    });
    out.write("manifest.json", pretty(&manifest).as_bytes())?;
    log::info!(
        "validation n={} r={:?} rmse={:.4} smape={:.2}%",
        validation.n,
        validation.r,
        validation.rmse,
        validation.smape
    );

    Ok(RunOutcome {
        validation,
        train: train_report,
        selection,
        loss_history: fitted.loss_history,
        output_dir: out.path().to_path_buf(),
        artifacts,
    })
}

pub(crate) fn pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

