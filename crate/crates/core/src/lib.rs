//! Water-quality regression from Sentinel-2 match-up tables.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`spectra`]: band metadata, match-up records and CSV ingestion
//! - [`features`]: feature-name parsing and the candidate predictor space
//! - [`screening`]: Tukey's fences, water masking and scene extraction
//! - [`model`]: a single-layer LSTM regressor trained with Adam
//! - [`evaluation`]: metrics, time-series folds and feature selection
//! - [`pipeline`]: run configuration, orchestration and plot aggregates

pub mod evaluation;
pub mod features;
pub mod model;
pub mod pipeline;
pub mod screening;
pub mod spectra;
