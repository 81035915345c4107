//! JSON model files.
//!
//! One envelope holds either family, tagged by `kind`:
//!
//! ```json
//! {"format_version": 1, "kind": "ensemble", "base_score": 1.5, "learning_rate": 0.1,
//!  "feature_layout": ["Price", ...], "trees": [{"nodes": [...]}]}
//! {"format_version": 1, "kind": "linear", "weights": [...], "intercept": 0.3,
//!  "feature_layout": [...]}
//! ```
//!
//! Optional `pipeline` and `target` entries carry the fitted encoder and the
//! target transform so a file is enough to score raw listings. Numbers are
//! written in shortest round-trip form and read back bit-exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{FittedModel, LinearModel};
use crate::boost::{Ensemble, ModelError};
use crate::eval::TargetMode;
use crate::pipeline::EncoderState;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Body {
    Ensemble(Ensemble),
    Linear(LinearModel),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format_version: u32,
    #[serde(flatten)]
    body: Body,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pipeline: Option<EncoderState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<TargetMode>,
}

/// A model plus whatever is needed to apply it to raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub model: FittedModel,
    pub pipeline: Option<EncoderState>,
    pub target: Option<TargetMode>,
}

impl ModelDocument {
    pub fn bare(model: FittedModel) -> Self {
        Self {
            model,
            pipeline: None,
            target: None,
        }
    }

    pub fn to_json(&self) -> String {
        let envelope = Envelope {
            format_version: FORMAT_VERSION,
            body: match &self.model {
                FittedModel::Ensemble(e) => Body::Ensemble(e.clone()),
                FittedModel::Linear(l) => Body::Linear(l.clone()),
            },
            pipeline: self.pipeline.clone(),
            target: self.target.clone(),
        };
        serde_json::to_string_pretty(&envelope).expect("model documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let envelope: Envelope =
            serde_json::from_str(text).map_err(|e| malformed("document", e))?;
        if envelope.format_version != FORMAT_VERSION {
            return Err(malformed(
                "format_version",
                format!("unsupported version {}", envelope.format_version),
            ));
        }
        let model = match envelope.body {
            Body::Ensemble(e) => {
                validate_ensemble(&e)?;
                FittedModel::Ensemble(e)
            }
            Body::Linear(l) => {
                validate_linear(&l)?;
                FittedModel::Linear(l)
            }
        };
        if let Some(pipeline) = &envelope.pipeline {
            if pipeline.layout() != model.feature_layout() {
                return Err(malformed(
                    "pipeline",
                    "encoder layout differs from the model's feature_layout",
                ));
            }
        }
        Ok(Self {
            model,
            pipeline: envelope.pipeline,
            target: envelope.target,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| io_error(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::from_json(&text)
    }
}

pub fn serialize(ensemble: &Ensemble) -> String {
    ModelDocument::bare(FittedModel::Ensemble(ensemble.clone())).to_json()
}

/// Reads an ensemble document; a linear document is rejected.
pub fn deserialize(text: &str) -> Result<Ensemble, ModelError> {
    match ModelDocument::from_json(text)?.model {
        FittedModel::Ensemble(e) => Ok(e),
        FittedModel::Linear(_) => Err(malformed("kind", "expected an ensemble, found linear")),
    }
}

fn malformed(location: &str, reason: impl ToString) -> ModelError {
    ModelError::MalformedModel {
        location: location.to_string(),
        reason: reason.to_string(),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> ModelError {
    ModelError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn validate_ensemble(e: &Ensemble) -> Result<(), ModelError> {
    if !e.base_score().is_finite() {
        return Err(malformed("base_score", "not finite"));
    }
    if !(e.learning_rate() > 0.0 && e.learning_rate() <= 1.0) {
        return Err(malformed("learning_rate", "must lie in (0, 1]"));
    }
    for (i, tree) in e.trees().iter().enumerate() {
        tree.validate(e.feature_layout().len())
            .map_err(|(node, reason)| malformed(&format!("trees[{i}].nodes[{node}]"), reason))?;
    }
    Ok(())
}

fn validate_linear(l: &LinearModel) -> Result<(), ModelError> {
    if l.weights.len() != l.feature_layout.len() {
        return Err(malformed(
            "weights",
            format!(
                "{} weights for a layout of {} columns",
                l.weights.len(),
                l.feature_layout.len()
            ),
        ));
    }
    if let Some(j) = l.weights.iter().position(|w| !w.is_finite()) {
        return Err(malformed(&format!("weights[{j}]"), "not finite"));
    }
    if !l.intercept.is_finite() {
        return Err(malformed("intercept", "not finite"));
    }
    Ok(())
}
