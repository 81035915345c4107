//! Sales-volume ranges used as ordinal regression targets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BinError {
    #[error("negative sales value {value} at index {index}")]
    NegativeValue { index: usize, value: f64 },
    #[error("non-finite sales value at index {index}")]
    NonFinite { index: usize },
    #[error("invalid bin spec: {0}")]
    InvalidSpec(String),
}

/// Ascending edges and one label per interval. Interval `i` is
/// `[edges[i], edges[i + 1])`; the last one is closed on the right and values
/// above it clamp into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBinSpec")]
pub struct BinSpec {
    edges: Vec<f64>,
    labels: Vec<String>,
}

#[derive(Deserialize)]
struct RawBinSpec {
    edges: Vec<f64>,
    labels: Vec<String>,
}

impl TryFrom<RawBinSpec> for BinSpec {
    type Error = BinError;

    fn try_from(raw: RawBinSpec) -> Result<Self, Self::Error> {
        BinSpec::new(raw.edges, raw.labels)
    }
}

const DEFAULT_EDGES: [f64; 9] = [
    0.0, 50.0, 100.0, 300.0, 500.0, 1000.0, 3000.0, 5000.0, 10000.0,
];

impl BinSpec {
    pub fn new(edges: Vec<f64>, labels: Vec<String>) -> Result<Self, BinError> {
        if edges.len() < 2 {
            return Err(BinError::InvalidSpec("need at least two edges".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(BinError::InvalidSpec("edges must be finite".into()));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BinError::InvalidSpec(
                "edges must be strictly increasing".into(),
            ));
        }
        if labels.len() != edges.len() - 1 {
            return Err(BinError::InvalidSpec(format!(
                "{} labels for {} intervals",
                labels.len(),
                edges.len() - 1
            )));
        }
        Ok(Self { edges, labels })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_bins(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn bin_of(&self, value: f64) -> Result<usize, BinError> {
        bin_index(self, 0, value)
    }
}

impl Default for BinSpec {
    fn default() -> Self {
        default_bins()
    }
}

/// The eight sales ranges `0-50` through `5000-10000`, including the
/// `300-500` range.
pub fn default_bins() -> BinSpec {
    let labels = DEFAULT_EDGES
        .windows(2)
        .map(|w| format!("{}-{}", w[0], w[1]))
        .collect();
    BinSpec::new(DEFAULT_EDGES.to_vec(), labels).expect("default bins are valid")
}

fn bin_index(spec: &BinSpec, index: usize, value: f64) -> Result<usize, BinError> {
    if !value.is_finite() {
        return Err(BinError::NonFinite { index });
    }
    if value < 0.0 {
        return Err(BinError::NegativeValue { index, value });
    }
    // number of edges <= value, minus one, clamped into [0, n_bins)
    let at_or_below = spec.edges.partition_point(|&e| e <= value);
    Ok(at_or_below.saturating_sub(1).min(spec.n_bins() - 1))
}

pub fn bin_of(value: f64, spec: &BinSpec) -> Result<usize, BinError> {
    bin_index(spec, 0, value)
}

pub fn apply_binning(targets: &[f64], spec: &BinSpec) -> Result<Vec<usize>, BinError> {
    targets
        .iter()
        .enumerate()
        .map(|(i, &v)| bin_index(spec, i, v))
        .collect()
}
