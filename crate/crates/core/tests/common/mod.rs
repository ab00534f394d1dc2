#![allow(dead_code)]

use std::path::{Path, PathBuf};

use aquaseries::pipeline::RunConfig;
use aquaseries::spectra::CSV_HEADER;
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Writes a match-up CSV whose chlorophyll column is `10 * NR(B2,B3) + 5`
/// plus small Gaussian-ish noise. Six stations, roughly monthly, 2016-2021.
pub fn planted_nr_table(dir: &Path, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for station in 0..6 {
        for month in 0..72 {
            let year = 2016 + month / 12;
            let day = 1 + rng.random_range(0..27u32);
            let date = NaiveDate::from_ymd_opt(year, (month % 12) as u32 + 1, day).unwrap();
            let bands: Vec<f64> = (0..10).map(|_| rng.random_range(0.005..0.12)).collect();
            let (b2, b3) = (bands[1], bands[2]);
            let noise: f64 = (0..4).map(|_| rng.random_range(-0.05..0.05)).sum();
            let chla = 10.0 * (b2 - b3) / (b2 + b3) + 5.0 + noise;
            let band_text: Vec<String> = bands.iter().map(f64::to_string).collect();
            out.push_str(&format!(
                "ST{station:02},{date},{},{},{},{chla},,\n",
                114.0 + station as f64 * 0.01,
                22.3,
                band_text.join(",")
            ));
        }
    }
    let path = dir.join("matchups.csv");
    std::fs::write(&path, out).unwrap();
    path
}

/// Small model and short training, enough for the planted signal.
pub fn quick_config(matchup: PathBuf, output: PathBuf) -> RunConfig {
    let mut c = RunConfig { matchup_csv: matchup, output_dir: output, ..RunConfig::default() };
    c.train.hidden_dim = 12;
    c.train.epochs = 60;
    c.train.learning_rate = 0.01;
    c.train.dropout_rate = 0.0;
    c.selection.epochs = Some(10);
    c
}
