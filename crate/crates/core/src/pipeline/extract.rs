//! Builds a match-up table from in-situ samples and scene grids.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{ExtractConfig, PipelineError, Stage};
use crate::screening::{extract_point, temporal_match, Extraction, Rejection, SceneGrid};
use crate::spectra::{MatchupRecord, MatchupTable};

/// One in-situ sample. `x`/`y` are scene-frame metres; `lon`/`lat` are carried through.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Sample {
    pub station_id: String,
    pub date: NaiveDate,
    pub x: f64,
    pub y: f64,
    pub lon: f64,
    pub lat: f64,
    pub chla: Option<f64>,
    pub ss: Option<f64>,
    pub turbidity: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExtractSummary {
    pub samples: usize,
    pub matched: usize,
    pub no_scene: usize,
    pub outside_scene: usize,
    pub land_adjacent: usize,
    pub no_water_pixels: usize,
    pub invalid: usize,
}

pub fn read_samples(path: &Path) -> Result<Vec<Sample>, PipelineError> {
    let err = |m: String| PipelineError::new(Stage::Extract, format!("{}: {m}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
    reader.deserialize().map(|row| row.map_err(|e| err(e.to_string()))).collect()
}

/// Every `*.sgrid` file in `dir`, ordered by date. A file's stem must equal its scene date.
pub fn load_scenes(dir: &Path) -> Result<Vec<SceneGrid>, PipelineError> {
    let err = |m: String| PipelineError::new(Stage::Extract, m);
    let entries = std::fs::read_dir(dir).map_err(|e| err(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| err(e.to_string()))?.path();
        if path.extension().is_some_and(|x| x == "sgrid") {
            paths.push(path);
        }
    }
    paths.sort();
    let mut scenes = Vec::with_capacity(paths.len());
    for path in paths {
        let scene = SceneGrid::read(&path).map_err(|e| err(format!("{}: {e}", path.display())))?;
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name != scene.file_name() {
            return Err(err(format!("{}: header date {} does not match file name", path.display(), scene.date)));
        }
        scenes.push(scene);
    }
    Ok(scenes)
}

/// Pairs samples with scenes (nearest date, at most one day apart) and
/// extracts buffered water reflectance at each sample location.
pub fn build_matchups(
    samples: &[Sample],
    scenes: &[SceneGrid],
    config: &ExtractConfig,
) -> Result<(MatchupTable, ExtractSummary), PipelineError> {
    let sample_dates: Vec<NaiveDate> = samples.iter().map(|s| s.date).collect();
    let scene_dates: Vec<NaiveDate> = scenes.iter().map(|s| s.date).collect();
    let matched = temporal_match(&sample_dates, &scene_dates);

    let mut summary = ExtractSummary { samples: samples.len(), no_scene: matched.unmatched.len(), ..Default::default() };
    let mut records = Vec::new();
    for &(si, ci) in &matched.pairs {
        let sample = &samples[si];
        let extraction = match extract_point(
            &scenes[ci],
            (sample.x, sample.y),
            config.buffer_radius_m,
            config.min_land_distance_m,
        ) {
            Ok(x) => x,
            Err(_) => {
                summary.outside_scene += 1;
                continue;
            }
        };
        match extraction {
            Extraction::Spectrum { spectrum, .. } => {
                let targets = [sample.chla, sample.ss, sample.turbidity];
                // record keeps the in-situ sampling date
                match MatchupRecord::new(&sample.station_id, sample.date, (sample.lon, sample.lat), spectrum, targets) {
                    Ok(r) => {
                        records.push(r);
                        summary.matched += 1;
                    }
                    Err(m) => {
                        log::warn!("sample {} on {}: {m}", sample.station_id, sample.date);
                        summary.invalid += 1;
                    }
                }
            }
            Extraction::Rejected(Rejection::Adjacency { .. }) => summary.land_adjacent += 1,
            Extraction::Rejected(Rejection::NoWaterPixels) => summary.no_water_pixels += 1,
        }
    }
    log::info!(
        "extracted {} of {} samples ({} without scene, {} near land)",
        summary.matched,
        summary.samples,
        summary.no_scene,
        summary.land_adjacent
    );
    Ok((MatchupTable::from_records(records, String::new()), summary))
}
