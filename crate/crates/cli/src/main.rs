use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use salesboost::baselines::ModelSpec;
use salesboost::binning::default_bins;
use salesboost::boost::{ModelError, TrainConfig};
use salesboost::data::{load_csv, load_csv_unlabeled, write_csv, Schema};
use salesboost::eval::{
    generate_synthetic, render_report, run_experiment, ExperimentConfig, ExperimentError,
    ReportFormat, SyntheticSpec, TargetMode,
};
use salesboost::model_io::ModelDocument;
use salesboost::pipeline::{fit_pipeline, ColorLexicon, ImputationPlan};

#[derive(Parser)]
#[command(
    name = "salesboost",
    version,
    about = "Sales-volume forecasting with boosted trees"
)]
struct Cli {
    /// Worker threads (defaults to one per core). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic product-listing CSV.
    Synth {
        /// JSON generator spec; defaults apply to absent fields.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the encoder and one model on a CSV and save both.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// JSON schema; the product-listing schema when omitted.
        #[arg(long)]
        schema: Option<PathBuf>,
        /// JSON training job, or bare boosting hyperparameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Score a CSV with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a model comparison and write the report.
    Compare {
        #[arg(long)]
        experiment: PathBuf,
        /// Report path; the format follows the extension (.txt, .csv, .json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect the sales-range bins.
    Bins {
        /// Print the default bins as JSON.
        #[arg(long)]
        show: bool,
    },
}

/// Failure classes, each with its own exit status.
enum CliError {
    Config(String),
    Data(String),
    Model(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Model(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Model(m) => m,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidConfig(_) => CliError::Config(e.to_string()),
            _ => CliError::Model(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::InvalidConfig(_) | ExperimentError::Synthetic(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

fn data_err(e: impl ToString) -> CliError {
    CliError::Data(e.to_string())
}

/// What `train --config` accepts.
#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrainJob {
    model: ModelSpec,
    target_mode: TargetMode,
    plan: Option<ImputationPlan>,
    lexicon: Option<ColorLexicon>,
}

impl Default for TrainJob {
    fn default() -> Self {
        Self {
            model: ModelSpec::Xgboost(TrainConfig::default()),
            target_mode: TargetMode::RawSales,
            plan: None,
            lexicon: None,
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid JSON in {}: {e}", path.display())))
}

fn read_train_job(path: &Path) -> Result<TrainJob, CliError> {
    match read_json::<TrainJob>(path) {
        Ok(job) => Ok(job),
        // a bare hyperparameter object is shorthand for the boosted learner
        Err(first) => match read_json::<TrainConfig>(path) {
            Ok(config) => Ok(TrainJob {
                model: ModelSpec::Xgboost(config),
                ..Default::default()
            }),
            Err(_) => Err(first),
        },
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| data_err(format!("cannot write {}: {e}", path.display())))
}

fn synth(spec: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let spec: SyntheticSpec = match spec {
        Some(p) => read_json(p)?,
        None => SyntheticSpec::default(),
    };
    let table = generate_synthetic(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    write_csv(&table, out).map_err(data_err)?;
    eprintln!("wrote {} rows to {}", table.n_rows(), out.display());
    Ok(())
}

fn train(
    data: &Path,
    schema: Option<&Path>,
    config: Option<&Path>,
    model_out: &Path,
) -> Result<(), CliError> {
    let job = match config {
        Some(p) => read_train_job(p)?,
        None => TrainJob::default(),
    };
    let schema = match schema {
        Some(p) => Schema::from_json_file(p).map_err(|e| CliError::Config(e.to_string()))?,
        None => Schema::product_listing(),
    };
    let table = load_csv(data, &schema).map_err(data_err)?;
    let plan = job
        .plan
        .unwrap_or_else(|| ImputationPlan::default_for(&schema));
    let state = fit_pipeline(&table, &plan, &job.lexicon.unwrap_or_default()).map_err(data_err)?;
    let encoded = state.transform(&table).map_err(data_err)?;
    let targets = encoded.targets.expect("training data carries its target");
    let targets = job.target_mode.apply(&targets).map_err(data_err)?;
    let model = job.model.fit(&encoded.matrix, &targets)?;
    let document = ModelDocument {
        model,
        pipeline: Some(state),
        target: Some(job.target_mode),
    };
    document.save(model_out)?;
    eprintln!(
        "trained on {} rows, model saved to {}",
        table.n_rows(),
        model_out.display()
    );
    Ok(())
}

fn predict(model: &Path, data: &Path, out: &Path) -> Result<(), CliError> {
    let document = ModelDocument::load(model)?;
    let state = document
        .pipeline
        .as_ref()
        .ok_or_else(|| CliError::Model("model file carries no fitted encoder".into()))?;
    let table = load_csv_unlabeled(data, &state.schema()).map_err(data_err)?;
    let encoded = state.transform(&table).map_err(data_err)?;
    let predictions = document.model.predict(&encoded.matrix)?;

    let bins = match &document.target {
        Some(TargetMode::BinnedRange { bins }) => Some(bins),
        _ => None,
    };
    let mut text = String::from(if bins.is_some() {
        "prediction,range\n"
    } else {
        "prediction\n"
    });
    for p in &predictions {
        text.push_str(&p.to_string());
        if let Some(bins) = bins {
            let index = p.round().clamp(0.0, (bins.n_bins() - 1) as f64) as usize;
            text.push(',');
            text.push_str(bins.label(index).expect("index clamped to the bins"));
        }
        text.push('\n');
    }
    write_text(out, &text)?;
    eprintln!(
        "wrote {} predictions to {}",
        predictions.len(),
        out.display()
    );
    Ok(())
}

fn compare(experiment: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let config: ExperimentConfig = read_json(experiment)?;
    let report = run_experiment(&config)?;
    match out.or(config.output.as_deref()) {
        Some(path) => {
            write_text(path, &render_report(&report, ReportFormat::from_path(path)))?;
            eprintln!("report written to {}", path.display());
        }
        None => print!("{}", render_report(&report, ReportFormat::Text)),
    }
    Ok(())
}

fn bins(show: bool) -> Result<(), CliError> {
    if !show {
        return Err(CliError::Config("nothing to do; pass --show".into()));
    }
    let text = serde_json::to_string_pretty(&default_bins()).expect("bins serialize");
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{text}").map_err(data_err)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Synth { spec, out } => synth(spec.as_deref(), out),
        Command::Train {
            data,
            schema,
            config,
            model_out,
        } => train(data, schema.as_deref(), config.as_deref(), model_out),
        Command::Predict { model, data, out } => predict(model, data, out),
        Command::Compare { experiment, out } => compare(experiment, out.as_deref()),
        Command::Bins { show } => bins(*show),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
