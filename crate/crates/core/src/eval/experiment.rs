use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::metrics::MetricsRow;
use super::report::{MetricsReport, ReportRow};
use super::synth::{generate_synthetic, SyntheticError, SyntheticSpec};
use crate::baselines::{default_roster, ModelSpec};
use crate::binning::{apply_binning, default_bins, BinError, BinSpec};
use crate::data::{load_csv, split_train_test, DataError, DataTable, Schema};
use crate::pipeline::{fit_pipeline, ColorLexicon, ImputationPlan, PipelineError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Synthetic(#[from] SyntheticError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Binning(#[from] BinError),
}

/// What the models are asked to predict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TargetMode {
    /// Sales volume as recorded.
    #[default]
    RawSales,
    /// The index of the sales range each volume falls in.
    BinnedRange {
        #[serde(default = "default_bins")]
        bins: BinSpec,
    },
}

impl TargetMode {
    pub fn binned() -> Self {
        TargetMode::BinnedRange {
            bins: default_bins(),
        }
    }

    pub fn apply(&self, targets: &[f64]) -> Result<Vec<f64>, BinError> {
        match self {
            TargetMode::RawSales => Ok(targets.to_vec()),
            TargetMode::BinnedRange { bins } => Ok(apply_binning(targets, bins)?
                .into_iter()
                .map(|i| i as f64)
                .collect()),
        }
    }

    /// Nearest whole value; in binned mode also clamped to a valid index.
    pub fn round(&self, prediction: f64) -> f64 {
        let r = prediction.round();
        match self {
            TargetMode::RawSales => r,
            TargetMode::BinnedRange { bins } => r.clamp(0.0, (bins.n_bins() - 1) as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    /// A CSV file; the product-listing schema when no schema file is given.
    Csv {
        path: PathBuf,
        #[serde(default)]
        schema: Option<PathBuf>,
    },
    Synthetic {
        #[serde(default)]
        spec: SyntheticSpec,
    },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic {
            spec: SyntheticSpec::default(),
        }
    }
}

impl DataSource {
    pub fn load(&self) -> Result<DataTable, ExperimentError> {
        match self {
            DataSource::Csv { path, schema } => {
                let schema = match schema {
                    Some(p) => Schema::from_json_file(p)?,
                    None => Schema::product_listing(),
                };
                Ok(load_csv(path, &schema)?)
            }
            DataSource::Synthetic { spec } => Ok(generate_synthetic(spec)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosterEntry {
    pub name: String,
    pub model: ModelSpec,
}

fn default_roster_entries() -> Vec<RosterEntry> {
    default_roster()
        .into_iter()
        .map(|(name, model)| RosterEntry { name, model })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub target_mode: TargetMode,
    pub train_fraction: f64,
    /// Seeds the train/test shuffle.
    pub seed: u64,
    pub roster: Vec<RosterEntry>,
    /// Imputation rules; the listing defaults for the schema when unset.
    pub plan: Option<ImputationPlan>,
    pub lexicon: Option<ColorLexicon>,
    /// Round predictions to whole values before scoring.
    pub round_predictions: bool,
    /// Where the command-line tool writes the report.
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSource::default(),
            target_mode: TargetMode::RawSales,
            train_fraction: 0.8,
            seed: 7,
            roster: default_roster_entries(),
            plan: None,
            lexicon: None,
            round_predictions: false,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.roster.is_empty() {
            return Err(ExperimentError::InvalidConfig(
                "model roster is empty".into(),
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(ExperimentError::InvalidConfig(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Loads the data, splits it, fits the encoder on the training part, fits
/// every roster model and scores it on the held-out part.
///
/// A model that fails to fit or predict gets a failed row; the others still
/// run. Rows follow roster order whatever order the fits finish in.
pub fn run_experiment(config: &ExperimentConfig) -> Result<MetricsReport, ExperimentError> {
    config.validate()?;
    let table = config.data.load()?;
    run_on_table(config, &table)
}

/// [`run_experiment`] on an already loaded table; `config.data` is ignored.
pub fn run_on_table(
    config: &ExperimentConfig,
    table: &DataTable,
) -> Result<MetricsReport, ExperimentError> {
    config.validate()?;
    let split = split_train_test(table.n_rows(), config.train_fraction, config.seed)?;
    let train = table.select_rows(&split.train_rows);
    let test = table.select_rows(&split.test_rows);

    let plan = config
        .plan
        .clone()
        .unwrap_or_else(|| ImputationPlan::default_for(table.schema()));
    let lexicon = config.lexicon.clone().unwrap_or_default();
    let state = fit_pipeline(&train, &plan, &lexicon)?;
    let train_enc = state.transform(&train)?;
    let test_enc = state.transform(&test)?;
    let y_train = config
        .target_mode
        .apply(&train_enc.targets.expect("training table has its target"))?;
    let y_test = config
        .target_mode
        .apply(&test_enc.targets.expect("test table has its target"))?;

    let rows = config
        .roster
        .par_iter()
        .map(|entry| {
            let scored = entry
                .model
                .fit(&train_enc.matrix, &y_train)
                .and_then(|model| model.predict(&test_enc.matrix))
                .map_err(|e| e.to_string())
                .and_then(|mut pred| {
                    if config.round_predictions {
                        pred.iter_mut()
                            .for_each(|p| *p = config.target_mode.round(*p));
                    }
                    MetricsRow::score(&entry.name, &pred, &y_test).map_err(|e| e.to_string())
                });
            match scored {
                Ok(row) => ReportRow::Ok(row),
                Err(error) => ReportRow::Failed {
                    model_name: entry.name.clone(),
                    error,
                },
            }
        })
        .collect();
    Ok(MetricsReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boost::TrainConfig;

    fn quick(mode: TargetMode, roster: Vec<RosterEntry>) -> ExperimentConfig {
        ExperimentConfig {
            data: DataSource::Synthetic {
                spec: SyntheticSpec {
                    n_products: 300,
                    ..Default::default()
                },
            },
            target_mode: mode,
            roster,
            ..Default::default()
        }
    }

    fn xgb(n_trees: usize) -> RosterEntry {
        RosterEntry {
            name: "XGBoost".into(),
            model: ModelSpec::Xgboost(TrainConfig {
                n_trees,
                ..Default::default()
            }),
        }
    }

    #[test]
    fn empty_roster_is_rejected() {
        let config = quick(TargetMode::RawSales, vec![]);
        assert!(matches!(
            run_experiment(&config),
            Err(ExperimentError::InvalidConfig(_))
        ));
    }

    #[test]
    fn bad_fraction_is_rejected() {
        let mut config = quick(TargetMode::RawSales, vec![xgb(5)]);
        config.train_fraction = 1.0;
        assert!(matches!(
            run_experiment(&config),
            Err(ExperimentError::InvalidConfig(_))
        ));
    }

    #[test]
    fn failing_model_gets_a_marked_row() {
        let roster = vec![
            RosterEntry {
                name: "Bayes".into(),
                model: ModelSpec::BayesRidge { alpha: -1.0 },
            },
            xgb(5),
        ];
        let report = run_experiment(&quick(TargetMode::binned(), roster)).unwrap();
        assert!(matches!(report.rows[0], ReportRow::Failed { .. }));
        assert_eq!(report.rows[1].model_name(), "XGBoost");
        assert!(report.rows[1].metrics().is_some());
    }

    #[test]
    fn binned_truth_is_an_index() {
        let mode = TargetMode::binned();
        let y = mode.apply(&[0.0, 49.0, 50.0, 9999.0, 12000.0]).unwrap();
        assert_eq!(y, vec![0.0, 0.0, 1.0, 7.0, 7.0]);
        assert_eq!(mode.round(7.6), 7.0);
        assert_eq!(mode.round(-0.7), 0.0);
        assert_eq!(TargetMode::RawSales.round(12.5), 13.0);
    }

    #[test]
    fn rounding_flag_gives_integer_errors() {
        let mut config = quick(TargetMode::binned(), vec![xgb(20)]);
        config.round_predictions = true;
        let report = run_experiment(&config).unwrap();
        let mse = report.rows[0].metrics().unwrap().mse;
        let n_test = 60.0;
        assert!(((mse * n_test).round() - mse * n_test).abs() < 1e-9);
    }

    #[test]
    fn config_json_defaults() {
        let config: ExperimentConfig = serde_json::from_str(
            r#"{"target_mode": {"mode": "binned_range"}, "roster": [{"name": "Linear", "model": {"kind": "ols"}}]}"#,
        )
        .unwrap();
        assert_eq!(config.target_mode, TargetMode::binned());
        assert_eq!(config.train_fraction, 0.8);
        assert_eq!(config.seed, 7);
        assert_eq!(config.data, DataSource::default());
        let full = ExperimentConfig::default();
        let names: Vec<&str> = full.roster.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["GBDT", "XGBoost", "Linear", "Bayes", "SVM"]);
    }
}
