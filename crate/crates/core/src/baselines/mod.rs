//! Comparison models sharing one fit/predict contract with the boosted
//! learner.

mod gbdt;
mod linear;
mod svr;

use serde::{Deserialize, Serialize};

use crate::boost::{self, Ensemble, ModelError, TrainConfig};
use crate::matrix::FeatureMatrix;

pub use gbdt::{fit_gbdt_first_order, fit_gbdt_with_callback, GbdtBaselineConfig};
pub use linear::{fit_bayes_ridge, fit_ols, predict_linear, LinearModel};
pub use svr::{fit_linear_svr, fit_linear_svr_with_callback, svr_objective, SvrConfig};

fn default_alpha() -> f64 {
    1.0
}

/// Which model to fit, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// The second-order boosted learner.
    Xgboost(TrainConfig),
    Gbdt(GbdtBaselineConfig),
    Ols,
    BayesRidge {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    LinearSvr(SvrConfig),
}

impl ModelSpec {
    pub fn fit(&self, matrix: &FeatureMatrix, targets: &[f64]) -> Result<FittedModel, ModelError> {
        Ok(match self {
            ModelSpec::Xgboost(config) => {
                FittedModel::Ensemble(boost::train(matrix, targets, config)?)
            }
            ModelSpec::Gbdt(config) => {
                FittedModel::Ensemble(fit_gbdt_first_order(matrix, targets, config)?)
            }
            ModelSpec::Ols => FittedModel::Linear(fit_ols(matrix, targets)?),
            ModelSpec::BayesRidge { alpha } => {
                FittedModel::Linear(fit_bayes_ridge(matrix, targets, *alpha)?)
            }
            ModelSpec::LinearSvr(config) => {
                FittedModel::Linear(fit_linear_svr(matrix, targets, config)?)
            }
        })
    }
}

/// A trained model of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Ensemble(Ensemble),
    Linear(LinearModel),
}

impl FittedModel {
    pub fn predict(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
        match self {
            FittedModel::Ensemble(e) => e.predict(matrix),
            FittedModel::Linear(l) => l.predict(matrix),
        }
    }

    pub fn feature_layout(&self) -> &[String] {
        match self {
            FittedModel::Ensemble(e) => e.feature_layout(),
            FittedModel::Linear(l) => &l.feature_layout,
        }
    }
}

/// The five models of the comparison, in report order, with their display
/// names.
pub fn default_roster() -> Vec<(String, ModelSpec)> {
    vec![
        (
            "GBDT".into(),
            ModelSpec::Gbdt(GbdtBaselineConfig::default()),
        ),
        ("XGBoost".into(), ModelSpec::Xgboost(TrainConfig::default())),
        ("Linear".into(), ModelSpec::Ols),
        ("Bayes".into(), ModelSpec::BayesRidge { alpha: 1.0 }),
        ("SVM".into(), ModelSpec::LinearSvr(SvrConfig::default())),
    ]
}
