mod common;

use std::collections::BTreeSet;

use aquaseries::pipeline::{run_pipeline, RunConfig, Stage, FAILED_MARKER, MANIFEST_DEFAULT_KEYS};

fn tiny(dir: &std::path::Path, seed: u64) -> RunConfig {
    let input = common::planted_nr_table(dir, seed);
    let mut c = common::quick_config(input, dir.join("out"));
    c.train.epochs = 15;
    c.selection.epochs = Some(3);
    c.selection.k_min = 1;
    c.selection.k_max = 2;
    c
}

#[test]
fn missing_matchup_fails_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never-created");
    let config = RunConfig {
        matchup_csv: dir.path().join("absent.csv"),
        output_dir: out.clone(),
        ..RunConfig::default()
    };
    let e = run_pipeline(&config).unwrap_err();
    assert_eq!(e.stage, Stage::Config);
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("absent.csv"), "{e}");
    assert!(!out.exists());
}

#[test]
fn manifest_records_every_default() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny(dir.path(), 1);
    let outcome = run_pipeline(&config).unwrap();
    let text = std::fs::read_to_string(outcome.output_dir.join("manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&text).unwrap();

    let keys: BTreeSet<&str> = manifest["defaults"].as_object().unwrap().keys().map(String::as_str).collect();
    let expected: BTreeSet<&str> = MANIFEST_DEFAULT_KEYS.iter().copied().collect();
    assert_eq!(keys, expected);
    let d = &manifest["defaults"];
    assert_eq!(d["learning_rate"], 0.01);
    assert_eq!(d["decay_rate"], 0.97);
    assert_eq!(d["tukey_k"], 1.5);
    assert_eq!(d["window_len"], 4);
    assert_eq!(d["hidden_dim"], 12);
    assert_eq!(d["forget_gate_bias_init"], 1.0);
    assert_eq!(d["screened_variable"], "target");
    assert_eq!(d["selection_epochs"], 3);
    assert_eq!(d["band_wavelengths_nm"]["B8A"], 865.0);
    assert_eq!(manifest["config_digest"], config.digest());

    for name in manifest["artifacts"].as_array().unwrap() {
        assert!(outcome.output_dir.join(name.as_str().unwrap()).is_file(), "{name}");
    }
    assert!(!outcome.output_dir.join(FAILED_MARKER).exists());
}

#[test]
fn plot_data_has_one_row_per_month() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny(dir.path(), 2);
    let outcome = run_pipeline(&config).unwrap();
    let csv = std::fs::read_to_string(outcome.output_dir.join("plot_data.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "year,month,station_mean,estimate_mean,station_n,estimate_n,split");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // planted table covers 2016-2021 monthly
    assert_eq!(rows.len(), 72);
    for r in &rows {
        let year: i32 = r[0].parse().unwrap();
        assert_eq!(r[6], if year < 2020 { "train" } else { "validation" });
        assert_eq!(r[4], "6");
    }
    assert!(!csv.contains('\r'));
}

#[test]
fn failing_stage_leaves_marker() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = tiny(dir.path(), 3);
    config.selection.candidates = Some(vec!["B1".into(), "B2".into()]);
    config.selection.k_min = 3;
    config.selection.k_max = 4;
    let e = run_pipeline(&config).unwrap_err();
    assert_eq!(e.stage, Stage::Select);
    assert_eq!(e.exit_code(), 3);
    let marker = std::fs::read_to_string(config.output_dir.join(FAILED_MARKER)).unwrap();
    assert!(marker.contains("select"));

    // a later successful run clears it
    config.selection.k_min = 1;
    config.selection.k_max = 2;
    run_pipeline(&config).unwrap();
    assert!(!config.output_dir.join(FAILED_MARKER).exists());
}

#[test]
fn divergence_is_classified() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = tiny(dir.path(), 4);
    config.train.learning_rate = 1e300;
    config.train.decay_rate = 1.0;
    let e = run_pipeline(&config).unwrap_err();
    assert_eq!(e.exit_code(), 4, "{e}");
}

#[test]
fn screening_drops_training_outliers_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = tiny(dir.path(), 5);
    let text = std::fs::read_to_string(&config.matchup_csv).unwrap();
    // one absurd training value and one absurd validation value
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let patch = |line: &mut String| {
        let mut f: Vec<String> = line.split(',').map(String::from).collect();
        f[14] = "900".into();
        *line = f.join(",");
    };
    let train_idx = lines.iter().position(|l| l.contains(",2017-")).unwrap();
    let val_idx = lines.iter().position(|l| l.contains(",2021-")).unwrap();
    patch(&mut lines[train_idx]);
    patch(&mut lines[val_idx]);
    std::fs::write(&config.matchup_csv, lines.join("\n") + "\n").unwrap();
    config.selection.candidates = Some(vec!["NR(B2,B3)".into(), "B4".into()]);

    let outcome = run_pipeline(&config).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outcome.output_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["counts"]["screened_out"], 1);
    assert_eq!(manifest["counts"]["validation_records"], 144);
    let preds = std::fs::read_to_string(outcome.output_dir.join("predictions.csv")).unwrap();
    assert!(preds.lines().any(|l| l.contains(",validation,900,")));
}
