use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PipelineError, Stage};
use crate::model::TrainConfig;
use crate::screening::TUKEY_K;
use crate::spectra::{IngestPolicy, ParameterId};

/// Environment variable that overrides the training seed.
pub const SEED_ENV: &str = "AQUASERIES_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreenVariable {
    /// Fences on the modelled target, training years only.
    Target,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScreeningConfig {
    pub k: f64,
    pub variable: ScreenVariable,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        ScreeningConfig { k: TUKEY_K, variable: ScreenVariable::Target }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub folds: usize,
    /// Training epochs per fold model; `None` uses `train.epochs`.
    pub epochs: Option<usize>,
    /// Candidate feature names; `None` uses the full enumerated space.
    pub candidates: Option<Vec<String>>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig { k_min: 4, k_max: 12, folds: 5, epochs: None, candidates: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractConfig {
    /// In-situ samples: `station_id,date,x,y,lon,lat,chla,ss,turbidity`.
    pub samples_csv: Option<PathBuf>,
    pub buffer_radius_m: f64,
    pub min_land_distance_m: f64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig { samples_csv: None, buffer_radius_m: 20.0, min_land_distance_m: 200.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub matchup_csv: PathBuf,
    pub scene_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub parameter: ParameterId,
    /// First validation year; earlier years train.
    pub split_year: i32,
    pub ingest: IngestPolicy,
    pub screening: ScreeningConfig,
    pub selection: SelectionConfig,
    pub extract: ExtractConfig,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            matchup_csv: PathBuf::from("matchups.csv"),
            scene_dir: None,
            output_dir: PathBuf::from("out"),
            parameter: ParameterId::ChlA,
            split_year: 2020,
            ingest: IngestPolicy::default(),
            screening: ScreeningConfig::default(),
            selection: SelectionConfig::default(),
            extract: ExtractConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::config(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    /// Applies the seed override from [`SEED_ENV`], if set.
    pub fn apply_env(&mut self) -> Result<(), PipelineError> {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            self.train.seed = raw
                .trim()
                .parse()
                .map_err(|_| PipelineError::config(format!("{SEED_ENV}=`{raw}` is not an unsigned integer")))?;
        }
        Ok(())
    }

    /// Compact JSON with fixed field order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// Checks values and that input paths exist. Runs before any computation.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let err = |m: String| Err(PipelineError::new(Stage::Config, m));
        if !self.matchup_csv.is_file() {
            return err(format!("match-up table not found: {}", self.matchup_csv.display()));
        }
        self.validate_values()
    }

    /// Value checks without touching the filesystem.
    pub fn validate_values(&self) -> Result<(), PipelineError> {
        let err = |m: String| Err(PipelineError::new(Stage::Config, m));
        if let Some(dir) = &self.scene_dir {
            if !dir.is_dir() {
                return err(format!("scene directory not found: {}", dir.display()));
            }
        }
        if let Some(samples) = &self.extract.samples_csv {
            if !samples.is_file() {
                return err(format!("samples file not found: {}", samples.display()));
            }
        }
        self.train.validate().map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;
        let s = &self.selection;
        if s.k_min == 0 || s.k_min > s.k_max {
            return err(format!("selection bounds {}..={} are invalid", s.k_min, s.k_max));
        }
        if s.folds == 0 {
            return err("selection.folds must be positive".into());
        }
        let e = &self.extract;
        if !(e.buffer_radius_m >= 0.0 && e.min_land_distance_m >= 0.0) {
            return err("extract distances must be non-negative".into());
        }
        if s.epochs == Some(0) {
            return err("selection.epochs must be positive".into());
        }
        if self.screening.k.is_nan() || self.screening.k < 0.0 {
            return err(format!("screening.k must be non-negative, got {}", self.screening.k));
        }
        Ok(())
    }
}
