mod common;

use std::path::Path;
use std::process::{Command, Output};

fn aquaseries(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aquaseries"));
    cmd.args(args).env("RUST_LOG", "warn").env_remove("AQUASERIES_SEED");
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, seed: u64) -> std::path::PathBuf {
    let matchup = common::planted_nr_table(dir, seed);
    let mut config = common::quick_config(matchup, dir.join("out"));
    config.train.epochs = 10;
    config.selection.epochs = Some(2);
    config.selection.k_min = 1;
    config.selection.k_max = 2;
    let path = dir.join("config.json");
    std::fs::write(&path, config.canonical_json()).unwrap();
    path
}

#[test]
fn missing_input_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = aquaseries(&["run", "--matchup", "/no/such/file.csv", "--output", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/file.csv"));
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"train": {"learning_rate": "fast"}}"#).unwrap();
    assert_eq!(aquaseries(&["run"], Some(&path)).status.code(), Some(2));
    std::fs::write(&path, r#"{"trian": {}}"#).unwrap();
    assert_eq!(aquaseries(&["screen"], Some(&path)).status.code(), Some(2));
}

#[test]
fn bad_table_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    std::fs::write(&csv, "station_id,date,lon,lat\nA,2020-01-01,1,2\n").unwrap();
    let out = dir.path().join("o");
    let o = aquaseries(&["ingest", "--matchup", csv.to_str().unwrap(), "--output", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("B1"));
    assert!(out.join(".failed").exists());
}

#[test]
fn stages_run_one_by_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 11);
    let out = dir.path().join("out");
    for stage in ["ingest", "screen", "features", "select"] {
        let o = aquaseries(&[stage], Some(&config));
        assert!(o.status.success(), "{stage}: {}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["matchups.csv", "screened.csv", "screening.json", "features.csv", "selected_features.txt"] {
        assert!(out.join(file).is_file(), "{file}");
    }
    let mut reader = csv::Reader::from_path(out.join("features.csv")).unwrap();
    assert_eq!(reader.headers().unwrap().len(), 2 + 136);

    let features = dir.path().join("features.txt");
    std::fs::write(&features, "# planted\nNR(B2,B3)\nB4\nNR(B2,B3)\n").unwrap();
    let o = aquaseries(&["train", "--features", features.to_str().unwrap()], Some(&config));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(out.join("selected_features.txt")).unwrap(), "NR(B2,B3)\nB4\n");

    let model = out.join("model.lstm");
    let o = aquaseries(&["report", "--model", model.to_str().unwrap()], Some(&config));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.starts_with("parameter,method,n,r,rmse,mae,smape\nChl-a,LSTM,144,"), "{stdout}");
    for file in ["report.json", "report.csv", "train_report.json", "predictions.csv", "plot_data.csv"] {
        assert!(out.join(file).is_file(), "{file}");
    }
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 12);
    let features = dir.path().join("f.txt");
    std::fs::write(&features, "NR(B2,B3)\n").unwrap();
    let train = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_aquaseries"));
        cmd.args(["train", "--features", features.to_str().unwrap(), "--config", config.to_str().unwrap()]);
        cmd.env("RUST_LOG", "warn").env_remove("AQUASERIES_SEED");
        if let Some(s) = env {
            cmd.env("AQUASERIES_SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.output().unwrap().status.success());
        let snapshot = std::fs::read(dir.path().join("out/model.lstm")).unwrap();
        aquaseries::model::ModelSnapshot::from_bytes(&snapshot).unwrap().manifest.seed
    };
    assert_eq!(train(None, None), 42);
    assert_eq!(train(Some("7"), None), 7);
    assert_eq!(train(Some("7"), Some("9")), 9);

    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aquaseries"));
    cmd.args(["screen", "--config", config.to_str().unwrap()]).env("AQUASERIES_SEED", "x");
    assert_eq!(cmd.output().unwrap().status.code(), Some(2));
}

#[test]
fn extract_builds_matchups_from_scenes() {
    use aquaseries::screening::SceneGrid;
    use aquaseries::spectra::{BandId, Spectrum};

    let dir = tempfile::tempdir().unwrap();
    let scenes = dir.path().join("scenes");
    std::fs::create_dir(&scenes).unwrap();
    let mut v = [0.03; BandId::COUNT];
    v[BandId::B3.index()] = 0.06;
    v[BandId::B11.index()] = 0.01;
    for date in ["2019-05-01", "2019-05-20"] {
        let mut g = SceneGrid::uniform((50, 50), 10.0, date.parse().unwrap(), &Spectrum::new(v).unwrap());
        g.set_land(49, 49, true);
        std::fs::write(scenes.join(g.file_name()), g.to_bytes()).unwrap();
    }
    let samples = dir.path().join("samples.csv");
    std::fs::write(
        &samples,
        "station_id,date,x,y,lon,lat,chla,ss,turbidity\n\
         WM1,2019-05-02,100,100,114.1,22.3,4.5,,\n\
         WM2,2019-05-02,480,480,114.2,22.3,3.5,,\n\
         WM3,2019-05-10,100,100,114.1,22.3,2.0,8,\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = aquaseries(
        &[
            "extract",
            "--scenes",
            scenes.to_str().unwrap(),
            "--samples",
            samples.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.join("matchups.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("WM1,2019-05-02,114.1,22.3,"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("extract_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["land_adjacent"], 1);
    assert_eq!(summary["no_scene"], 1);
}
