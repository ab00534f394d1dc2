use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aquaseries::features::parse_feature_list;
use aquaseries::model::ModelSnapshot;
use aquaseries::pipeline::{
    build_matchups, evaluate_snapshot, fit_final, load_scenes, loss_history_csv, plot_data, predictions_csv,
    prepare, read_samples, run_pipeline, select_stage, split_report, OutputDir, PipelineError, RunConfig, Stage,
};
use aquaseries::spectra::{ingest_matchup_table, ParameterId};

#[derive(Parser)]
#[command(name = "aquaseries", version, about = "Water-quality regression from Sentinel-2 match-ups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a match-up table and write its canonical form.
    Ingest(Common),
    /// Build a match-up table from in-situ samples and scene grids.
    Extract {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scenes: Option<PathBuf>,
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Split by year and apply outlier fences to the training years.
    Screen(Common),
    /// Evaluate the candidate features on the screened table.
    Features(Common),
    /// Rank candidates and choose the feature subset.
    Select(Common),
    /// Train the final model.
    Train {
        #[command(flatten)]
        common: Common,
        /// Feature names, one per line; selection runs when omitted.
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Score a saved model on the train and validation splits.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
    },
    /// Like `evaluate`, also writing predictions and monthly plot data.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
    },
    /// Every stage end to end.
    Run(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    matchup: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// chla, ss or turbidity.
    #[arg(long)]
    parameter: Option<String>,
    #[arg(long)]
    split_year: Option<i32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
}

impl Common {
    /// Config file, then the seed environment variable, then flags.
    fn resolve(&self) -> Result<RunConfig, PipelineError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        config.apply_env()?;
        if let Some(p) = &self.matchup {
            config.matchup_csv = p.clone();
        }
        if let Some(p) = &self.output {
            config.output_dir = p.clone();
        }
        if let Some(p) = &self.parameter {
            config.parameter = p.parse::<ParameterId>().map_err(PipelineError::config)?;
        }
        if let Some(y) = self.split_year {
            config.split_year = y;
        }
        if let Some(s) = self.seed {
            config.train.seed = s;
        }
        if let Some(e) = self.epochs {
            config.train.epochs = e;
        }
        Ok(config)
    }
}

/// Runs `body` against the output directory, leaving a failure marker on error.
fn with_output(
    config: &RunConfig,
    body: impl FnOnce(&mut OutputDir) -> Result<(), PipelineError>,
) -> Result<(), PipelineError> {
    let mut out = OutputDir::create(&config.output_dir)?;
    match body(&mut out) {
        Ok(()) => {
            out.clear_failed();
            Ok(())
        }
        Err(e) => {
            out.mark_failed(&e);
            Err(e)
        }
    }
}

fn json(value: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn read_feature_file(path: &Path) -> Result<Vec<String>, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::config(format!("cannot read {}: {e}", path.display())))?;
    let names: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
    let (exprs, dropped) =
        parse_feature_list(&names).map_err(|e| PipelineError::config(format!("{}: {e}", path.display())))?;
    for d in dropped {
        log::warn!("duplicate feature {d} ignored");
    }
    Ok(exprs.iter().map(|e| e.name()).collect())
}

fn load_snapshot(path: &Path) -> Result<ModelSnapshot, PipelineError> {
    let bytes = std::fs::read(path)
        .map_err(|e| PipelineError::config(format!("cannot read model {}: {e}", path.display())))?;
    ModelSnapshot::from_bytes(&bytes).map_err(|e| PipelineError::new(Stage::Evaluate, format!("{}: {e}", path.display())))
}

fn evaluate(common: &Common, model: &Path, with_plot: bool) -> Result<(), PipelineError> {
    let config = common.resolve()?;
    config.validate()?;
    let snapshot = load_snapshot(model)?;
    with_output(&config, |out| {
        let prep = prepare(&config)?;
        let rows = evaluate_snapshot(&snapshot, &prep)?;
        let names = &snapshot.manifest.feature_names;
        let validation = split_report(&prep, &rows, "validation", names)?;
        let train = split_report(&prep, &rows, "train", names)?;
        out.write("report.json", validation.to_json().as_bytes())?;
        out.write("report.csv", validation.to_csv().as_bytes())?;
        out.write("train_report.json", train.to_json().as_bytes())?;
        if with_plot {
            out.write("predictions.csv", predictions_csv(&rows).as_bytes())?;
            out.write("plot_data.csv", plot_data(&prep, &rows).as_bytes())?;
        }
        print!("{}", validation.to_csv());
        Ok(())
    })
}

fn dispatch(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Ingest(common) => {
            let config = common.resolve()?;
            config.validate()?;
            with_output(&config, |out| {
                let table = ingest_matchup_table(&config.matchup_csv, &config.ingest)
                    .map_err(|e| PipelineError::new(Stage::Ingest, e.to_string()))?;
                out.write("matchups.csv", table.to_csv().as_bytes())?;
                println!("{} record(s), sha256 {}", table.len(), table.provenance.digest);
                Ok(())
            })
        }
        Command::Extract { common, scenes, samples } => {
            let mut config = common.resolve()?;
            if let Some(s) = scenes {
                config.scene_dir = Some(s);
            }
            if samples.is_some() {
                config.extract.samples_csv = samples;
            }
            let scene_dir = config.scene_dir.clone().ok_or_else(|| PipelineError::config("no scene directory given"))?;
            let samples_csv =
                config.extract.samples_csv.clone().ok_or_else(|| PipelineError::config("no samples file given"))?;
            config.validate_values()?;
            with_output(&config, |out| {
                let samples = read_samples(&samples_csv)?;
                let scenes = load_scenes(&scene_dir)?;
                let (table, summary) = build_matchups(&samples, &scenes, &config.extract)?;
                out.write("matchups.csv", table.to_csv().as_bytes())?;
                out.write("extract_summary.json", &json(&summary))?;
                println!("{} of {} sample(s) matched", summary.matched, summary.samples);
                Ok(())
            })
        }
        Command::Screen(common) => {
            let config = common.resolve()?;
            config.validate()?;
            with_output(&config, |out| {
                let prep = prepare(&config)?;
                out.write("screened.csv", prep.table.to_csv().as_bytes())?;
                out.write("screening.json", &json(&prep.fences))?;
                let removed = prep.fences.as_ref().map_or(0, |f| f.rejected.len());
                println!("{} record(s) kept, {removed} screened out", prep.table.len());
                Ok(())
            })
        }
        Command::Features(common) => {
            let config = common.resolve()?;
            config.validate()?;
            with_output(&config, |out| {
                let prep = prepare(&config)?;
                let (matrix, log) = prep.feature_matrix(&prep.candidates()?)?;
                out.write("features.csv", matrix.to_csv().as_bytes())?;
                println!("{} feature(s), {} undefined value(s) set to 0", matrix.n_cols(), log.total_undefined());
                Ok(())
            })
        }
        Command::Select(common) => {
            let config = common.resolve()?;
            config.validate()?;
            with_output(&config, |out| {
                let prep = prepare(&config)?;
                let (matrix, _) = prep.feature_matrix(&prep.candidates()?)?;
                let selection = select_stage(&prep, &matrix)?;
                out.write("selected_features.txt", format!("{}\n", selection.names.join("\n")).as_bytes())?;
                out.write("selection.json", &json(&selection))?;
                println!("{}", selection.names.join(", "));
                Ok(())
            })
        }
        Command::Train { common, features } => {
            let config = common.resolve()?;
            config.validate()?;
            let names = features.as_deref().map(read_feature_file).transpose()?;
            with_output(&config, |out| {
                let prep = prepare(&config)?;
                let names = match names {
                    Some(n) => n,
                    None => {
                        let (matrix, _) = prep.feature_matrix(&prep.candidates()?)?;
                        select_stage(&prep, &matrix)?.names
                    }
                };
                let fitted = fit_final(&prep, &names)?;
                out.write("model.lstm", &fitted.snapshot.to_bytes())?;
                out.write("loss_history.csv", loss_history_csv(&fitted.loss_history).as_bytes())?;
                out.write("selected_features.txt", format!("{}\n", names.join("\n")).as_bytes())?;
                println!("trained on {} sequence(s)", fitted.train_sequences);
                Ok(())
            })
        }
        Command::Evaluate { common, model } => evaluate(&common, &model, false),
        Command::Report { common, model } => evaluate(&common, &model, true),
        Command::Run(common) => {
            let config = common.resolve()?;
            let outcome = run_pipeline(&config)?;
            print!("{}", outcome.validation.to_csv());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
